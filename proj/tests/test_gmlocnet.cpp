// Copyright 2026 The STMD Tracker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_util.hpp"

#include "stmd/errors.hpp"
#include "stmd/gmlocnet.hpp"
#include "stmd/train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <functional>
#include <random>

using namespace stmd;
using stmd::testing::random_matrix;

namespace {

double mask_at(double d, double sigma) {
  Matrix p(1, 3);
  p << d, 0.0, 0.0;
  return gaussian_mask(p, Vector3::Zero(), sigma)(0);
}

}  // namespace

TEST(GaussianMask, OneAtTheCenter) {
  const Matrix p = random_matrix(5, 3, 1);
  for (int i = 0; i < 5; ++i) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      EXPECT_EQ(gaussian_mask(p.row(i), p.row(i).transpose(), sigma)(0), 1.0);
    }
  }
}

TEST(GaussianMask, KnownValue) {
  EXPECT_NEAR(mask_at(2.0, 2.0), std::exp(-0.5), 1e-12);
  Matrix p(1, 3);
  p << 1.0, 1.0, std::sqrt(2.0);
  EXPECT_NEAR(gaussian_mask(p, Vector3::Zero(), 2.0)(0), std::exp(-0.5), 1e-12);
}

TEST(GaussianMask, StrictlyDecreasingInDistance) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int n = 0; n < 1000; ++n) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_GT(mask_at(a, 2.0), mask_at(b, 2.0)) << a << " " << b;
  }
}

TEST(GaussianMask, RejectsBadInput) {
  EXPECT_THROW(gaussian_mask(Matrix::Zero(2, 3), Vector3::Zero(), 0.0), ArgumentError);
  EXPECT_THROW(gaussian_mask(Matrix::Zero(2, 2), Vector3::Zero(), 1.0), ArgumentError);
}

TEST(GaussianMask, NormalizeDividesByMax) {
  Eigen::VectorXd w(3);
  w << 0.2, 0.5, 0.1;
  const auto n = normalize_mask(w);
  EXPECT_DOUBLE_EQ(n(1), 1.0);
  EXPECT_DOUBLE_EQ(n(0), 0.4);
  EXPECT_EQ(normalize_mask(Eigen::VectorXd::Zero(3)), Eigen::VectorXd::Zero(3));
}

TEST(FuseFeatures, WeightsRows) {
  ag::Tape tape;
  const auto g = tape.constant(random_matrix(3, 2, 1));
  const auto m = tape.constant(random_matrix(3, 2, 2));
  Eigen::VectorXd w(3);
  w << 1.0, 0.5, 0.0;
  const Matrix f = fuse_features(g, m, w).value();
  EXPECT_TRUE(f.row(1).isApprox(0.5 * (g.value().row(1) + m.value().row(1))));
  EXPECT_EQ(f.row(2).norm(), 0.0);
  EXPECT_THROW(fuse_features(g, m, Eigen::VectorXd::Ones(2)), ArgumentError);
}

TEST(SampleProposals, TopKWithTiesByIndex) {
  const std::vector<double> s{0.3, 0.9, 0.3, 0.9, 0.1};
  EXPECT_EQ(sample_proposals(s, 3), (std::vector<int>{1, 3, 0}));
  EXPECT_EQ(sample_proposals(s, 5), (std::vector<int>{1, 3, 0, 2, 4}));
  EXPECT_THROW(sample_proposals(s, 0), ArgumentError);
  EXPECT_THROW(sample_proposals(s, 6), ArgumentError);
}

TEST(SelectBest, ArgmaxAndFallback) {
  const Box3D prev = Box3D::make({1, 2, 3}, {1, 2, 1}, 0.3);
  EXPECT_EQ(select_best({}, {1, 2, 1}, prev).center, prev.center);
  std::vector<Proposal> p(3);
  p[0].score = 0.2;
  p[1].score = 0.8;
  p[1].center = Vector3(4, 5, 6);
  p[1].theta = -0.1;
  p[2].score = 0.8;
  const Box3D b = select_best(p, {0.7, 1.5, 1.2}, prev);
  EXPECT_EQ(b.center, Vector3(4, 5, 6));
  EXPECT_NEAR(b.theta, -0.1, 1e-12);
  EXPECT_DOUBLE_EQ(b.size.l, 1.5);
}

TEST(Localization, ShapesAndScores) {
  const auto cfg = stmd::testing::tiny_config();
  nn::ParameterSet ps;
  std::mt19937_64 rng(4);
  const auto params = LocalizationParams::create(ps, cfg, rng);
  ag::Tape tape;
  const Matrix coords = random_matrix(cfg.centers, 3, 5);
  const auto votes = hough_vote(coords, tape.constant(random_matrix(cfg.centers, cfg.width_out, 6)), params.vote);
  EXPECT_EQ(votes.size(), cfg.centers);
  EXPECT_TRUE(votes.vote_centers.isApprox(coords + votes.offsets.value()));
  std::vector<double> obj(votes.objectness.value().data(), votes.objectness.value().data() + cfg.centers);
  const auto idx = sample_proposals(obj, cfg.top_k);
  const auto prop = proposal_head(votes, idx, 0.2, params.proposal);
  ASSERT_EQ(prop.proposals.size(), static_cast<std::size_t>(cfg.top_k));
  EXPECT_DOUBLE_EQ(prop.proposals.front().score, 1.0);
  for (const auto& p : prop.proposals) EXPECT_LE(p.score, 1.0);
  EXPECT_THROW(proposal_head(votes, {}, 0.0, params.proposal), ArgumentError);
}

TEST(LocalizationGradients, VoteAndProposalHeads) {
  const auto cfg = stmd::testing::tiny_config();
  nn::ParameterSet ps;
  std::mt19937_64 rng(8);
  const auto params = LocalizationParams::create(ps, cfg, rng);
  const Matrix coords = random_matrix(cfg.centers, 3, 9);
  const Matrix feats = random_matrix(cfg.centers, cfg.width_out, 10);
  const Matrix p1 = random_matrix(cfg.centers, 3, 11), p2 = random_matrix(cfg.centers, 1, 12);
  const Matrix p3 = random_matrix(cfg.top_k, 4, 13);
  const std::vector<int> sampled{0, 2, 4, 6};
  auto fn = [&](ag::Tape& tape) {
    const auto votes = hough_vote(coords, tape.constant(feats), params.vote);
    const auto prop = proposal_head(votes, sampled, 0.0, params.proposal);
    const ag::Var terms[] = {ag::sum(ag::mul(votes.offsets, tape.constant(p1))),
                             ag::sum(ag::mul(votes.objectness, tape.constant(p2))),
                             ag::sum(ag::mul(prop.residuals, tape.constant(p3)))};
    return ag::add_scalars(terms);
  };
  std::vector<ag::Parameter*> list;
  for (std::size_t i = 0; i < ps.size(); ++i) list.push_back(&ps[i]);
  const auto report = grad_check(fn, list, 1e-5, 0, 1e-6);
  EXPECT_LE(report.max_rel_error, 1e-3) << report.worst_parameter;
}

TEST(GaussianMask, NormalizeIdempotentAndScaleFree) {
  const Matrix p = random_matrix(12, 3, 20);
  const auto g = gaussian_mask(p, Vector3(0.1, 0.2, 0.0), 1.0);
  const auto n = normalize_mask(g);
  EXPECT_TRUE(normalize_mask(n).isApprox(n, 1e-15));
  EXPECT_TRUE(normalize_mask(3.7 * g).isApprox(n, 1e-15));
  EXPECT_GT(g.minCoeff(), 0.0);
  EXPECT_LE(g.maxCoeff(), 1.0);
}

TEST(FuseFeatures, LinearInSum) {
  ag::Tape tape;
  const Matrix a = random_matrix(4, 3, 31), b = random_matrix(4, 3, 32), c = random_matrix(4, 3, 33);
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(4, 0.1, 1.0);
  const Matrix lhs = fuse_features(tape.constant(a + 2.0 * c), tape.constant(b), w).value();
  const Matrix rhs = fuse_features(tape.constant(a), tape.constant(b), w).value() +
                     2.0 * fuse_features(tape.constant(c), tape.constant(Matrix::Zero(4, 3)), w).value();
  EXPECT_TRUE(lhs.isApprox(rhs, 1e-12));
}

TEST(SampleProposals, MatchesSortingOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 6);
  for (int n = 0; n < 200; ++n) {
    std::vector<double> s(16);
    for (double& v : s) v = level(rng) / 6.0;
    const int k = 1 + n % 16;
    std::vector<double> got;
    for (int i : sample_proposals(s, k)) got.push_back(s[static_cast<std::size_t>(i)]);
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    sorted.resize(static_cast<std::size_t>(k));
    EXPECT_EQ(got, sorted);
  }
}

TEST(SelectBest, InvariantToScoreScaling) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box3D prev = Box3D::make({0, 0, 0}, {1, 1, 1}, 0);
  for (int n = 0; n < 50; ++n) {
    std::vector<Proposal> p(6);
    for (auto& q : p) {
      q.score = u(rng);
      q.center = Vector3(u(rng), u(rng), u(rng));
    }
    auto scaled = p;
    for (auto& q : scaled) q.score *= 4.5;
    EXPECT_EQ(select_best(p, {1, 1, 1}, prev).center, select_best(scaled, {1, 1, 1}, prev).center);
  }
}

TEST(Localization, ZeroResidualHeadsAndHeadingWrap) {
  const auto cfg = stmd::testing::tiny_config();
  nn::ParameterSet ps;
  std::mt19937_64 rng(7);
  auto params = LocalizationParams::create(ps, cfg, rng);
  params.proposal.out.weight->value.setZero();
  params.proposal.out.bias->value.setZero();
  ag::Tape tape;
  const auto votes = hough_vote(random_matrix(cfg.centers, 3, 8), tape.constant(random_matrix(cfg.centers, cfg.width_out, 9)),
                                params.vote);
  const std::vector<int> idx{3, 1, 5};
  const auto out = proposal_head(votes, idx, 0.4, params.proposal);
  ASSERT_EQ(out.proposals.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    EXPECT_EQ(out.proposals[r].center, Vector3(votes.vote_centers.row(idx[r]).transpose()));
    EXPECT_DOUBLE_EQ(out.proposals[r].theta, 0.4);
  }
  params.proposal.out.bias->value(0, 3) = 0.5;
  ag::Tape t2;
  const auto v2 = hough_vote(random_matrix(cfg.centers, 3, 8), t2.constant(random_matrix(cfg.centers, cfg.width_out, 9)),
                             params.vote);
  const auto wrapped = proposal_head(v2, idx, 3.0, params.proposal);
  EXPECT_NEAR(wrapped.proposals[0].theta, 3.5 - 2 * M_PI, 1e-12);
}
