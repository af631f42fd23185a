#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "hssfun/generators.hpp"
#include "hssfun/serialization.hpp"

using namespace hssfun;

namespace {

ClusterTree uneven_tree() { return ClusterTree::build(37, 5); }

}  // namespace

TEST(Serialization, MatrixRoundTripIsBitExact) {
  Rng rng(3);
  const Matrix M = random_matrix(4, 7, rng);
  const auto j = nlohmann::json::parse(matrix_to_json(M).dump());
  EXPECT_EQ(matrix_from_json(j, "M"), M);
  const Matrix E(0, 3);
  EXPECT_EQ(matrix_from_json(matrix_to_json(E), "E").cols(), 3);
}

TEST(Serialization, RaggedRowsRejected) {
  auto j = matrix_to_json(Matrix::Ones(2, 2));
  j["entries"][1].push_back(1.0);
  EXPECT_THROW(matrix_from_json(j, "M"), parse_error);
  j = matrix_to_json(Matrix::Ones(2, 2));
  j["rows"] = 3;
  EXPECT_THROW(matrix_from_json(j, "M"), parse_error);
}

TEST(Serialization, HssRoundTrip) {
  Rng rng(5);
  for (bool sym : {true, false}) {
    const HssMatrix H = random_hss(uneven_tree(), 3, rng, sym);
    const auto j = nlohmann::json::parse(hss_to_json(H).dump());
    const HssMatrix G = hss_from_json(j);
    ASSERT_EQ(G.tree, H.tree);
    EXPECT_EQ(G.symmetric, sym);
    EXPECT_EQ(hss_to_dense(G), hss_to_dense(H));
  }
}

TEST(Serialization, TelescopicRoundTrip) {
  Rng rng(7);
  for (bool sym : {true, false}) {
    TelescopicDecomposition T = random_telescopic(uneven_tree(), 2, rng, sym);
    const auto j = nlohmann::json::parse(telescopic_to_json(T).dump());
    const TelescopicDecomposition S = telescopic_from_json(j);
    EXPECT_EQ(S.symmetric, sym);
    EXPECT_FALSE(S.standard);
    EXPECT_EQ(to_dense(S), to_dense(T));
  }
}

TEST(Serialization, StandardFlagSurvives) {
  Rng rng(9);
  const TelescopicDecomposition T = from_hss(random_hss(uneven_tree(), 2, rng));
  ASSERT_TRUE(T.standard);
  EXPECT_TRUE(telescopic_from_json(telescopic_to_json(T)).standard);
}

TEST(Serialization, WrongKindOrShapeRejected) {
  Rng rng(11);
  const HssMatrix H = random_hss(uneven_tree(), 2, rng);
  EXPECT_THROW(telescopic_from_json(hss_to_json(H)), parse_error);
  EXPECT_THROW(hss_from_json(nlohmann::json::array()), parse_error);

  auto j = hss_to_json(H);
  j["nodes"].erase(j["nodes"].size() - 1);
  EXPECT_THROW(hss_from_json(j), parse_error);

  j = hss_to_json(H);
  j["nodes"][3]["U"] = matrix_to_json(Matrix::Ones(1, 1));
  EXPECT_THROW(hss_from_json(j), parse_error);

  j = hss_to_json(H);
  j["leaves"][0][1] = 1000;
  EXPECT_THROW(hss_from_json(j), parse_error);
}

TEST(Serialization, FileRoundTrip) {
  Rng rng(13);
  const HssMatrix H = random_hss(uneven_tree(), 2, rng);
  const auto path = (std::filesystem::temp_directory_path() / "hssfun_serialization_test.json").string();
  write_json_file(path, hss_to_json(H));
  EXPECT_EQ(hss_to_dense(hss_from_json(read_json_file(path))), hss_to_dense(H));
  std::remove(path.c_str());
  EXPECT_THROW(read_json_file(path), error);
}
