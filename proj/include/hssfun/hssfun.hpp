#pragma once

// Everything at once.

#include "cluster_tree.hpp"
#include "dense.hpp"
#include "elliptic.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "generators.hpp"
#include "hss.hpp"
#include "matfun.hpp"
#include "matrix_source.hpp"
#include "poles.hpp"
#include "rational_fit.hpp"
#include "rational_krylov.hpp"
#include "serialization.hpp"
#include "spectrum.hpp"
#include "telescopic.hpp"
