#pragma once

// JSON round trips for HSS matrices and telescopic decompositions.
//
// Layout: {"kind", "n", "depth", "leaves": [[lo, hi], ...], flags,
//          "nodes": [{"id": [depth, position], <matrices>}, ...]}
// with each matrix written as {"rows", "cols", "entries": [[row], ...]}.
// Doubles are written with 17 significant digits.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "cluster_tree.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "hss.hpp"
#include "telescopic.hpp"

namespace hssfun {

inline nlohmann::json matrix_to_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"entries", std::move(rows)}};
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& where) {
  try {
    const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
    const auto& e = j.at("entries");
    if (r < 0 || c < 0 || !e.is_array() || static_cast<Eigen::Index>(e.size()) != r)
      throw parse_error(where + ": matrix entries do not match rows/cols");
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      const auto& row = e[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
        throw parse_error(where + ": row " + std::to_string(i) + " has the wrong length");
      for (Eigen::Index k = 0; k < c; ++k) M(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return M;
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error(where + ": " + ex.what());
  }
}

namespace detail {

inline nlohmann::json tree_to_json(const ClusterTree& t) {
  nlohmann::json leaves = nlohmann::json::array();
  for (const Range& r : t.leaf_ranges()) leaves.push_back({r.lo, r.hi});
  return leaves;
}

inline ClusterTree tree_from_json(const nlohmann::json& j) {
  try {
    std::vector<Range> leaves;
    for (const auto& r : j.at("leaves")) leaves.push_back({r.at(0).get<Eigen::Index>(), r.at(1).get<Eigen::Index>()});
    ClusterTree t = ClusterTree::from_leaves(leaves);
    if (j.contains("n") && j.at("n").get<Eigen::Index>() != t.size()) throw parse_error("tree: n does not match leaves");
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error(std::string("tree: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw parse_error(std::string("tree: ") + ex.what());
  }
}

inline void expect_kind(const nlohmann::json& j, const std::string& kind) {
  if (!j.is_object() || !j.contains("kind") || j.at("kind") != kind)
    throw parse_error("expected a JSON object with \"kind\": \"" + kind + "\"");
}

/// Visits node objects, checking ids against heap order.
template <class Fn>
void for_each_node(const nlohmann::json& j, const ClusterTree& tree, Fn&& fn) {
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array() || static_cast<Eigen::Index>(nodes.size()) != tree.node_count())
    throw parse_error("nodes: expected " + std::to_string(tree.node_count()) + " entries");
  for (Eigen::Index i = 0; i < tree.node_count(); ++i) {
    const auto& nd = nodes[static_cast<std::size_t>(i)];
    const NodeId id = ClusterTree::id_of(i);
    if (nd.at("id").at(0).get<int>() != id.depth || nd.at("id").at(1).get<Eigen::Index>() != id.position)
      throw parse_error("nodes: entry " + std::to_string(i) + " is not node " + id.str());
    fn(i, nd, "node " + id.str());
  }
}

}  // namespace detail

inline nlohmann::json hss_to_json(const HssMatrix& H) {
  nlohmann::json nodes = nlohmann::json::array();
  for (Eigen::Index i = 0; i < H.tree.node_count(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    const NodeId id = ClusterTree::id_of(i);
    nlohmann::json nd = {{"id", {id.depth, id.position}}};
    if (i != 0) {
      nd["U"] = matrix_to_json(H.U[s]);
      if (!H.symmetric) nd["V"] = matrix_to_json(H.V[s]);
    }
    if (H.tree.is_leaf(i)) {
      nd["D"] = matrix_to_json(H.D[s]);
    } else {
      nd["B12"] = matrix_to_json(H.B12[s]);
      if (!H.symmetric) nd["B21"] = matrix_to_json(H.B21[s]);
    }
    nodes.push_back(std::move(nd));
  }
  return {{"kind", "hss"},
          {"n", H.size()},
          {"depth", H.tree.depth()},
          {"leaves", detail::tree_to_json(H.tree)},
          {"symmetric", H.symmetric},
          {"nodes", std::move(nodes)}};
}

inline HssMatrix hss_from_json(const nlohmann::json& j) {
  detail::expect_kind(j, "hss");
  try {
    HssMatrix H(detail::tree_from_json(j));
    H.symmetric = j.at("symmetric").get<bool>();
    detail::for_each_node(j, H.tree, [&](Eigen::Index i, const nlohmann::json& nd, const std::string& where) {
      const auto s = static_cast<std::size_t>(i);
      if (i != 0) {
        H.U[s] = matrix_from_json(nd.at("U"), where + " U");
        H.V[s] = H.symmetric ? H.U[s] : matrix_from_json(nd.at("V"), where + " V");
      }
      if (H.tree.is_leaf(i)) {
        H.D[s] = matrix_from_json(nd.at("D"), where + " D");
      } else {
        H.B12[s] = matrix_from_json(nd.at("B12"), where + " B12");
        H.B21[s] = H.symmetric ? Matrix(H.B12[s].transpose()) : matrix_from_json(nd.at("B21"), where + " B21");
      }
    });
    H.validate();
    return H;
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error(std::string("hss: ") + ex.what());
  } catch (const shape_error& ex) {
    throw parse_error(std::string("hss: ") + ex.what());
  }
}

inline nlohmann::json telescopic_to_json(const TelescopicDecomposition& T) {
  nlohmann::json nodes = nlohmann::json::array();
  for (Eigen::Index i = 0; i < T.tree.node_count(); ++i) {
    const NodeId id = ClusterTree::id_of(i);
    nlohmann::json nd = {{"id", {id.depth, id.position}}, {"D", matrix_to_json(T.d(i))}};
    if (i != 0) {
      nd["U"] = matrix_to_json(T.u(i));
      if (!T.symmetric) nd["V"] = matrix_to_json(T.v(i));
    }
    nodes.push_back(std::move(nd));
  }
  return {{"kind", "telescopic"},
          {"n", T.size()},
          {"depth", T.tree.depth()},
          {"leaves", detail::tree_to_json(T.tree)},
          {"symmetric", T.symmetric},
          {"standard", T.standard},
          {"nodes", std::move(nodes)}};
}

inline TelescopicDecomposition telescopic_from_json(const nlohmann::json& j) {
  detail::expect_kind(j, "telescopic");
  try {
    TelescopicDecomposition T(detail::tree_from_json(j));
    T.symmetric = j.at("symmetric").get<bool>();
    T.standard = j.at("standard").get<bool>();
    detail::for_each_node(j, T.tree, [&](Eigen::Index i, const nlohmann::json& nd, const std::string& where) {
      const auto s = static_cast<std::size_t>(i);
      T.D[s] = matrix_from_json(nd.at("D"), where + " D");
      if (i != 0) {
        T.U[s] = matrix_from_json(nd.at("U"), where + " U");
        if (!T.symmetric) T.V[s] = matrix_from_json(nd.at("V"), where + " V");
      }
    });
    T.validate();
    return T;
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error(std::string("telescopic: ") + ex.what());
  } catch (const shape_error& ex) {
    throw parse_error(std::string("telescopic: ") + ex.what());
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error("'" + path + "': " + ex.what());
  }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw error("cannot write '" + path + "'");
  os << j.dump(1) << '\n';
}

}  // namespace hssfun
