// Copyright 2026 The divmin Authors
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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "divmin/checkpoint.hpp"
#include "divmin/config.hpp"

namespace divmin {
namespace {

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  const ExperimentConfig c = parse_config(
      "# header\n"
      "version = 1\n"
      "algorithm = si-interact-js   # trailing\n"
      "\n"
      "  env=maze\n"
      "ppo.nu = 0.25\n"
      "ensemble.agents = 3\n"
      "seed = 42\n");
  EXPECT_EQ(c.algorithm, Algorithm::kInteractJS);
  EXPECT_EQ(c.env.kind, EnvKind::kMaze);
  EXPECT_EQ(c.ppo().nu, 0.25);
  EXPECT_EQ(c.ensemble.agents, 3);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_TRUE(c.is_ensemble());
}

TEST(Config, FormatRoundTrips) {
  ExperimentConfig c;
  set_config_value(c, "ppo.lr", "0.00031");
  set_config_value(c, "reward", "noisy");
  set_config_value(c, "p_m", "0.5");
  set_config_value(c, "chain.momentum", "0.3");
  const std::string text = format_config(c);
  const ExperimentConfig d = parse_config(text);
  EXPECT_EQ(format_config(d), text);
  EXPECT_EQ(d.ppo().lr, 0.00031);
  EXPECT_EQ(d.env.reward_mode, RewardMode::kNoisy);
  for (const auto& k : config_keys()) EXPECT_EQ(get_config_value(c, k), get_config_value(d, k)) << k;
}

TEST(Config, MissingVersionRejected) {
  EXPECT_THROW(parse_config("algorithm = ppo\n"), ConfigError);
}

TEST(Config, WrongVersionNamesBoth) {
  try {
    parse_config("version = 7\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(Config, UnknownKeyReportsLineAndKey) {
  try {
    parse_config("version = 1\n\nppo.bogus = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.key(), "ppo.bogus");
  }
}

TEST(Config, MalformedValuesRejected) {
  EXPECT_THROW(parse_config("version = 1\nppo.nu = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("version = 1\nppo.epochs = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config("version = 1\nalgorithm = dqn\n"), ConfigError);
  EXPECT_THROW(parse_config("version = 1\njust words\n"), ConfigError);
}

TEST(Config, ValidateCatchesOutOfRange) {
  ExperimentConfig c;
  set_config_value(c, "ppo.nu", "1.5");
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  set_config_value(c, "p_m", "-0.1");
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  set_config_value(c, "algorithm", "cem");
  set_config_value(c, "cem.population", "2");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, LoadMissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/divmin.cfg"), IoError);
}

TEST(Checkpoint, RandomMlpRoundTripsBitwise) {
  Rng rng(1);
  const Mlp net = Mlp::xavier({5, 7, 3, 2}, rng);
  Checkpoint c;
  put_mlp(c, "net", net);
  c.put_vec("odd", Vec::Constant(3, 1.0 / 3.0));
  const Checkpoint d = parse_checkpoint(serialize_checkpoint(c));
  const Mlp back = get_mlp(d, "net");
  EXPECT_EQ(back.params(), net.params());
  EXPECT_EQ(back.shape().in, 5);
  EXPECT_EQ(d.get_vec("odd"), c.get_vec("odd"));
}

TEST(Checkpoint, PolicyRoundTripsThroughFile) {
  Rng rng(2);
  const GaussianPolicy p = GaussianPolicy::init(3, 2, 8, rng, -0.7);
  Checkpoint c;
  put_policy(c, "policy", p);
  const auto path = std::filesystem::temp_directory_path() / "divmin_ckpt_test.divmin";
  save_checkpoint(c, path);
  const GaussianPolicy q = get_policy(load_checkpoint(path), "policy");
  EXPECT_EQ(q.flat(), p.flat());
  std::filesystem::remove(path);
}

TEST(Checkpoint, TruncatedRefused) {
  Checkpoint c;
  c.put("m", Mat::Ones(3, 3));
  const std::string text = serialize_checkpoint(c);
  EXPECT_THROW(parse_checkpoint(text.substr(0, text.size() / 2)), CheckpointError);
}

TEST(Checkpoint, BadMagicRefusedWithVersionNames) {
  try {
    parse_checkpoint("DIVMIN2\nentries 0\nend\n");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("DIVMIN2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("DIVMIN1"), std::string::npos);
  }
}

TEST(Checkpoint, MissingKeyAndBadKeyRejected) {
  Checkpoint c;
  EXPECT_THROW(c.get("absent"), CheckpointError);
  EXPECT_THROW(c.put("has space", Mat::Zero(1, 1)), ContractViolation);
}

}  // namespace
}  // namespace divmin
