#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rpclust/correspondence.hpp"
#include "rpclust/error.hpp"
#include "sample_data.hpp"

using namespace rpclust;

namespace {

CrossTab independence_table() {
  // Outer product of margins (1,2,3) x (2,1,4) gives p_ij = p_i+ p_+j exactly.
  CountMatrix f(3, 3);
  const int r[] = {1, 2, 3}, c[] = {2, 1, 4};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f(i, j) = r[i] * c[j];
  return oracle::make_table(f);
}

}  // namespace

TEST_SUITE("correspondence") {
  TEST_CASE("standardized matrix vanishes under independence") {
    const auto x = standardized_matrix(independence_table());
    CHECK(x.cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("standardized matrix of [[2,0],[0,2]] by direct evaluation") {
    CountMatrix f(2, 2);
    f << 2, 0, 0, 2;
    const auto x = standardized_matrix(oracle::make_table(f));
    // p_ij / (p_i+ sqrt(p_+j)) - sqrt(p_+j) with p = [[.5,0],[0,.5]], margins .5
    const double diag = 0.5 / (0.5 * std::sqrt(0.5)) - std::sqrt(0.5);
    const double off = 0.0 - std::sqrt(0.5);
    CHECK(x(0, 0) == doctest::Approx(diag).epsilon(1e-12));
    CHECK(x(1, 1) == doctest::Approx(diag).epsilon(1e-12));
    CHECK(x(0, 1) == doctest::Approx(off).epsilon(1e-12));
    CHECK(x(1, 0) == doctest::Approx(off).epsilon(1e-12));
  }

  TEST_CASE("1x1 table") {
    CountMatrix f(1, 1);
    f << 5;
    const auto ct = oracle::make_table(f);
    CHECK(standardized_matrix(ct)(0, 0) == doctest::Approx(0.0));
    CHECK(max_dims(ct) == 0);
    const auto emb = ca_embed(ct);
    CHECK(emb.dims() == 0);
    CHECK(emb.total_inertia == 0.0);
  }

  TEST_CASE("residual matrix relates to the row-standardized matrix") {
    std::mt19937_64 rng(7);
    const auto ct = oracle::make_table(oracle::random_table(rng, 4, 5));
    const auto s = standardized_residuals(ct);
    const auto x = standardized_matrix(ct);
    const auto r = ct.row_masses();
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) CHECK(x(i, j) == doctest::Approx(s(i, j) / std::sqrt(r(i))));
    CHECK(s.squaredNorm() == doctest::Approx(oracle::chi_square_over_n(ct.counts())));
  }

  TEST_CASE("independence table embeds at the origin") {
    const auto emb = ca_embed(independence_table());
    CHECK(emb.singular_values.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(emb.row_scores.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(emb.col_scores.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(total_inertia(independence_table()) < 1e-12);
  }

  TEST_CASE("2x2 first singular value is |phi| and inertia is phi^2") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 25; ++t) {
      const auto f = oracle::random_table(rng, 2, 2);
      const auto ct = oracle::make_table(f);
      const double phi = oracle::phi_2x2(f);
      CHECK(ca_embed(ct).singular_values(0) == doctest::Approx(phi).epsilon(1e-9));
      CHECK(total_inertia(ct) == doctest::Approx(phi * phi).epsilon(1e-9));
    }
  }

  TEST_CASE("block-diagonal table: sigma_1 = 1 and blocks share a sign") {
    const auto ct = build_crosstab(sample::two_blocks());
    const auto emb = ca_embed(ct);
    CHECK(emb.singular_values(0) == doctest::Approx(1.0));
    // Rows i0,i1 / columns c0,c1 form one block.
    const double s = emb.row_scores(0, 0);
    CHECK(std::abs(s) > 0.1);
    for (Eigen::Index k : {0, 1}) {
      CHECK(emb.row_scores(k, 0) * s > 0);
      CHECK(emb.col_scores(k, 0) * s > 0);
      CHECK(emb.row_scores(k + 2, 0) * s < 0);
      CHECK(emb.col_scores(k + 2, 0) * s < 0);
    }
  }

  TEST_CASE("random 5x4 inertia matches direct chi-square") {
    std::mt19937_64 rng(3);
    const auto f = oracle::random_table(rng, 5, 4);
    const auto ct = oracle::make_table(f);
    const double chi = oracle::chi_square_over_n(f);
    CHECK(total_inertia(ct) == doctest::Approx(chi).epsilon(1e-9));
    CHECK(ca_embed(ct).singular_values.squaredNorm() == doctest::Approx(chi).epsilon(1e-9));
  }

  TEST_CASE("scores reproduce the residual matrix") {
    // sum_k z_ik z_jk / sigma_k = S_ij / sqrt(r_i c_j) (reconstitution formula)
    std::mt19937_64 rng(5);
    const auto ct = oracle::make_table(oracle::random_table(rng, 5, 6));
    const auto emb = ca_embed(ct);
    const auto s = standardized_residuals(ct);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < emb.dims(); ++k)
          acc += emb.row_scores(i, k) * emb.col_scores(j, k) / emb.singular_values(k);
        CHECK(acc == doctest::Approx(s(i, j) / std::sqrt(emb.row_masses(i) * emb.col_masses(j))).epsilon(1e-9));
      }
  }

  TEST_CASE("mass-weighted scores are centred with variance sigma^2") {
    std::mt19937_64 rng(9);
    const auto ct = oracle::make_table(oracle::random_table(rng, 6, 4));
    const auto emb = ca_embed(ct);
    for (Eigen::Index k = 0; k < emb.dims(); ++k) {
      CHECK(std::abs(emb.row_masses.dot(emb.row_scores.col(k))) < 1e-10);
      CHECK(emb.row_masses.dot(emb.row_scores.col(k).cwiseAbs2()) ==
            doctest::Approx(emb.singular_values(k) * emb.singular_values(k)));
    }
  }

  TEST_CASE("dimension requests") {
    std::mt19937_64 rng(1);
    const auto ct = oracle::make_table(oracle::random_table(rng, 4, 3));
    CHECK(ca_embed(ct).dims() == 2);
    CHECK(ca_embed(ct, 1).dims() == 1);
    CHECK_THROWS_AS(ca_embed(ct, 3), Error);
    CHECK_THROWS_AS(ca_embed(ct, 0), Error);
    // Truncation does not change the total.
    CHECK(ca_embed(ct, 1).total_inertia == doctest::Approx(ca_embed(ct).total_inertia));
  }

  TEST_CASE("embedding is deterministic") {
    std::mt19937_64 rng(2);
    const auto ct = oracle::make_table(oracle::random_table(rng, 5, 5));
    CHECK(to_json(ca_embed(ct)).dump() == to_json(ca_embed(ct)).dump());
  }
}
