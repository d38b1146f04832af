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
#include "stmd/memory.hpp"
#include "stmd/train.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace stmd;
using stmd::testing::random_matrix;

namespace {

std::string read_golden(int len) {
  std::ifstream in(std::string(STMD_GOLDEN_DIR) + "/protocol_L" + std::to_string(len) + ".jsonl");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Fixture {
  TrackerConfig cfg = stmd::testing::tiny_config();
  nn::ParameterSet ps;
  MemoryParams params;

  Fixture() {
    std::mt19937_64 rng(11);
    params = MemoryParams::create(ps, cfg, rng);
  }

  SequenceFeatures features(ag::Tape& tape, int len, std::uint64_t seed) const {
    SequenceFeatures seq;
    for (int t = 0; t < len; ++t) {
      FrameFeatures f;
      f.centers = random_matrix(cfg.centers, 3, seed + 2 * t, -1.5, 1.5);
      f.feats = tape.constant(random_matrix(cfg.centers, cfg.width_out, seed + 2 * t + 1));
      f.t = t;
      for (int i = 0; i < cfg.centers; ++i) f.source.push_back(i);
      seq.push_back(f);
    }
    return seq;
  }
};

}  // namespace

class ProtocolTraceTest : public ::testing::TestWithParam<int> {};

TEST_P(ProtocolTraceTest, MatchesGoldenTrace) {
  const int len = GetParam();
  Fixture fx;
  ag::Tape tape;
  const auto out = run_bidirectional_protocol(fx.features(tape, len, 3), fx.params);
  EXPECT_EQ(out.trace.count('P'), 2 * len - 2);
  EXPECT_EQ(out.trace.count('U'), 2 * len - 3);
  const std::string golden = read_golden(len);
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(out.trace.to_jsonl(), golden);
  EXPECT_EQ(ProtocolTrace::from_jsonl(golden).records, out.trace.records);
  EXPECT_EQ(out.localization.size(), static_cast<std::size_t>(len));
  EXPECT_EQ(out.readout.size(), static_cast<std::size_t>(len));
  EXPECT_EQ(out.written.size(), static_cast<std::size_t>(2 * len - 3));
}

INSTANTIATE_TEST_SUITE_P(Lengths, ProtocolTraceTest, ::testing::Values(2, 3, 8));

TEST(Protocol, CountsForEveryLength) {
  Fixture fx;
  for (int len = 2; len <= 10; ++len) {
    ag::Tape tape;
    const auto out = run_bidirectional_protocol(fx.features(tape, len, 5), fx.params);
    EXPECT_EQ(out.trace.count('P'), 2 * len - 2);
    EXPECT_EQ(out.trace.count('U'), 2 * len - 3);
  }
  ag::Tape tape;
  EXPECT_THROW(run_bidirectional_protocol(fx.features(tape, 1, 5), fx.params), ArgumentError);
}

TEST(Protocol, FrameOnlySeesOneFrameAhead) {
  Fixture fx;
  const int len = 5;
  ag::Tape t1;
  const auto base = run_bidirectional_protocol(fx.features(t1, len, 7), fx.params);
  ag::Tape t2;
  auto seq = fx.features(t2, len, 7);
  seq[4].feats = t2.constant(seq[4].feats.value() * 3.0);
  const auto moved = run_bidirectional_protocol(seq, fx.params);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(base.localization[static_cast<std::size_t>(i)].feats.value(),
              moved.localization[static_cast<std::size_t>(i)].feats.value())
        << "frame " << i;
  }
  EXPECT_NE(base.localization[3].feats.value(), moved.localization[3].feats.value());
}

TEST(Protocol, LastFrameAblationChainsPreviousMemory) {
  Fixture fx;
  ag::Tape tape;
  const auto out = run_last_frame_protocol(fx.features(tape, 4, 9), fx.params);
  const std::string expect =
      "{\"op\":\"P\",\"query\":0,\"mem\":[0,0],\"out\":\"T(0,0)\"}\n"
      "{\"op\":\"U\",\"query\":0,\"mem\":null,\"out\":\"M(0,0)\"}\n"
      "{\"op\":\"P\",\"query\":1,\"mem\":[0,0],\"out\":\"T(1,0)\"}\n"
      "{\"op\":\"U\",\"query\":1,\"mem\":[0,0],\"out\":\"M(1,1)\"}\n"
      "{\"op\":\"P\",\"query\":2,\"mem\":[1,1],\"out\":\"T(2,1)\"}\n"
      "{\"op\":\"U\",\"query\":2,\"mem\":[1,1],\"out\":\"M(2,2)\"}\n"
      "{\"op\":\"P\",\"query\":3,\"mem\":[2,2],\"out\":\"T(3,2)\"}\n";
  EXPECT_EQ(out.trace.to_jsonl(), expect);
  EXPECT_EQ(run_memory(fx.features(tape, 4, 9), fx.params, MemoryMode::kLastFrame).trace.records,
            out.trace.records);
}

TEST(Protocol, TraceParseErrors) {
  EXPECT_THROW(ProtocolTrace::from_jsonl("{\"op\":\"X\"}\n"), ParseError);
  EXPECT_THROW(ProtocolTrace::from_jsonl("not json\n"), ParseError);
}

TEST(MemoryUpdate, MaskScoresAreProbabilities) {
  Fixture fx;
  ag::Tape tape;
  const auto out = run_bidirectional_protocol(fx.features(tape, 3, 13), fx.params);
  for (const auto& m : out.written) {
    EXPECT_EQ(m.size(), fx.cfg.centers);
    EXPECT_GE(m.mask_scores.value().minCoeff(), 0.0);
    EXPECT_LE(m.mask_scores.value().maxCoeff(), 1.0);
    EXPECT_EQ(m.mask_feats.cols(), fx.cfg.width_out);
  }
  const MemoryState self = memory_from_frame(fx.features(tape, 1, 1)[0], 0);
  EXPECT_EQ(self.mask_scores.value(), Matrix::Ones(fx.cfg.centers, 1));
  EXPECT_EQ(self.mask_feats.value().norm(), 0.0);
}

TEST(MemoryGradients, ProtocolParameters) {
  Fixture fx;
  const Matrix proj = random_matrix(fx.cfg.centers, fx.cfg.width_out, 21);
  const Matrix mproj = random_matrix(fx.cfg.centers, 1, 22);
  auto fn = [&](ag::Tape& tape) {
    const auto out = run_bidirectional_protocol(fx.features(tape, 3, 17), fx.params);
    std::vector<ag::Var> terms;
    for (const auto& tf : out.localization) terms.push_back(ag::sum(ag::mul(tf.feats, tape.constant(proj))));
    for (const auto& m : out.readout) {
      terms.push_back(ag::sum(ag::mul(m.mask_logits, tape.constant(mproj))));
      terms.push_back(ag::sum(ag::mul(m.mask_feats, tape.constant(proj))));
    }
    return ag::add_scalars(terms);
  };
  std::vector<ag::Parameter*> list;
  for (std::size_t i = 0; i < fx.ps.size(); ++i) list.push_back(&fx.ps[i]);
  const auto report = grad_check(fn, list, 1e-5, 24, 1e-6);
  EXPECT_LE(report.max_rel_error, 1e-3) << report.worst_parameter;
  EXPECT_GT(report.checked, 0);
}
