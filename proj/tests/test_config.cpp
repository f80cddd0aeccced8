//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "moluq/config.hpp"

namespace {

using namespace moluq;
namespace fs = std::filesystem;

fs::path write_config(const std::string &name, const std::string &content) {
  fs::path dir = fs::temp_directory_path() / "moluq_tests" / "config";
  fs::create_directories(dir);
  fs::path file = dir / name;
  std::ofstream out(file);
  out << content;
  return file;
}

fs::path dataset_stub() {
  return write_config("stub.csv", "smiles,label\nCCO,1\nCCN,0\n");
}

RunConfig valid_config() {
  RunConfig cfg;
  cfg.dataset = dataset_stub();
  cfg.test_size = 1;
  return cfg;
}

}  // namespace

TEST_CASE("config text parses sections, comments and quotes") {
  std::map<std::string, std::string> values = detail::parse_config_text(
      "# run setup\n"
      "task = property\n"
      "dataset = \"data/tox.csv\"  # path may hold '#' safely\n"
      "m = 3, 10, 15\n"
      "\n"
      "[seeds]\n"
      "split = 7\n"
      "\n"
      "[endpoint]\n"
      "model = 'gpt-4'\n"
      "temperature = 0.7\n");
  CHECK(values.at("task") == "property");
  CHECK(values.at("dataset") == "data/tox.csv");
  CHECK(values.at("m") == "3, 10, 15");
  CHECK(values.at("seeds.split") == "7");
  CHECK(values.at("endpoint.model") == "gpt-4");
  CHECK(values.at("endpoint.temperature") == "0.7");
}

TEST_CASE("a hash inside quotes is not a comment") {
  auto values = detail::parse_config_text("name = \"run #4\"\n");
  CHECK(values.at("name") == "run #4");
}

TEST_CASE("malformed config lines are rejected with line numbers") {
  CHECK_THROWS_WITH(detail::parse_config_text("just some words\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(detail::parse_config_text("a = 1\n[broken\n"),
                    Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THROWS_AS(detail::parse_config_text("= value\n"), ConfigError);
}

TEST_CASE("lists split on commas and drop padding") {
  CHECK(detail::split_list("3, 10,15 , 20")
        == std::vector<std::string> {"3", "10", "15", "20"});
  CHECK(detail::split_list("'a', \"b\"")
        == std::vector<std::string> {"a", "b"});
  CHECK(detail::split_list("one").size() == 1);
  CHECK(detail::split_list("").empty());
}

TEST_CASE("defaults survive an empty config") {
  RunConfig cfg = config_from_values({});
  CHECK(cfg.task == "property");
  CHECK(cfg.arm == "original");
  CHECK(cfg.m_values == std::vector<int> {5});
  CHECK(cfg.n_variants == 5);
  CHECK(cfg.k_icl == 4);
  CHECK(cfg.test_size == 10);
  CHECK(cfg.icl_strategy == "diverse");
  CHECK(cfg.linkage == "average");
  CHECK(cfg.cluster_threshold == 0.2);
  CHECK(cfg.fp_radius == 2);
  CHECK(cfg.fp_width == 2048);
  CHECK(cfg.endpoint_kind == "mock");
  CHECK(cfg.endpoint.model_name == "gpt-4");
  CHECK(cfg.endpoint.temperature == 1.0);
  CHECK(cfg.seeds.split == 1);
  CHECK(cfg.seeds.icl == 2);
  CHECK(cfg.seeds.enumeration == 3);
  CHECK(cfg.seeds.mock == 4);
  CHECK(cfg.mock.rank_policy == "echo");
  CHECK(cfg.output_dir == fs::path("out"));
  CHECK(cfg.resolved_cache_path() == fs::path("out") / "cache.jsonl");
}

TEST_CASE("explicit values land in every section") {
  RunConfig cfg = config_from_values({
      {"task", "reaction"},
      {"dataset", "data/rxn.txt"},
      {"arm", "both"},
      {"m", "3,10"},
      {"k_icl", "2"},
      {"cluster_threshold", "0.35"},
      {"seeds.mock", "99"},
      {"endpoint.model", "gpt-4"},
      {"endpoint.temperature", "0.2"},
      {"endpoint.max_in_flight", "8"},
      {"mock.kind", "template_reactor"},
      {"mock.p_err", "0.25"},
      {"mock.p_err_reformed", "0.4"},
      {"cache_path", "shared/cache.jsonl"},
  });
  CHECK(cfg.task == "reaction");
  CHECK(cfg.dataset_name == "rxn");  // derived from the file stem
  CHECK(cfg.arm == "both");
  CHECK(cfg.m_values == std::vector<int> {3, 10});
  CHECK(cfg.k_icl == 2);
  CHECK(cfg.cluster_threshold == 0.35);
  CHECK(cfg.seeds.mock == 99);
  CHECK(cfg.endpoint.temperature == 0.2);
  CHECK(cfg.endpoint.max_in_flight == 8);
  CHECK(cfg.mock.kind == "template_reactor");
  CHECK(cfg.mock.p_err == 0.25);
  CHECK(cfg.mock.p_err_original == -1.0);
  CHECK(cfg.mock.p_err_reformed == 0.4);
  CHECK(cfg.resolved_cache_path() == fs::path("shared/cache.jsonl"));
}

TEST_CASE("unknown keys and bad numbers are fatal") {
  CHECK_THROWS_WITH(config_from_values({{"taask", "property"}}),
                    Catch::Matchers::ContainsSubstring("unknown config key"));
  CHECK_THROWS_WITH(config_from_values({{"endpoint.baseurl", "x"}}),
                    Catch::Matchers::ContainsSubstring("unknown config key"));
  CHECK_THROWS_AS(config_from_values({{"test_size", "ten"}}), ConfigError);
  CHECK_THROWS_AS(config_from_values({{"m", "3,x"}}), ConfigError);
  CHECK_THROWS_AS(config_from_values({{"cluster_threshold", "0.2.5"}}),
                  ConfigError);
}

TEST_CASE("config files load from disk") {
  fs::path file = write_config("run.toml",
                               "task = property\n"
                               "dataset = stub.csv\n"
                               "test_size = 3\n"
                               "[seeds]\n"
                               "icl = 12\n");
  RunConfig cfg = load_run_config(file);
  CHECK(cfg.test_size == 3);
  CHECK(cfg.seeds.icl == 12);
  CHECK(cfg.dataset_name == "stub");

  CHECK_THROWS_AS(load_run_config(fs::path("/nonexistent/run.toml")),
                  ConfigError);
  fs::path broken = write_config("broken.toml", "task: property\n");
  CHECK_THROWS_WITH(load_run_config(broken),
                    Catch::Matchers::ContainsSubstring("broken.toml"));
}

TEST_CASE("validation accepts a sane configuration") {
  RunConfig cfg = valid_config();
  CHECK_NOTHROW(validate_config(cfg));
  cfg.arm = "both";
  cfg.endpoint_kind = "mock";
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("validation rejects each bad field") {
  auto rejects = [](auto mutate, const std::string &needle) {
    RunConfig cfg = valid_config();
    mutate(cfg);
    CHECK_THROWS_WITH(validate_config(cfg),
                      Catch::Matchers::ContainsSubstring(needle));
  };
  rejects([](RunConfig &c) { c.task = "regression"; }, "task");
  rejects([](RunConfig &c) { c.dataset.clear(); }, "dataset");
  rejects([](RunConfig &c) { c.dataset = "/missing/file.csv"; },
          "does not exist");
  rejects([](RunConfig &c) { c.arm = "neither"; }, "arm");
  rejects([](RunConfig &c) { c.m_values.clear(); }, "m needs");
  rejects([](RunConfig &c) { c.m_values = {5, 0}; }, "every m");
  rejects([](RunConfig &c) { c.n_variants = 0; }, "n_variants");
  rejects([](RunConfig &c) { c.k_icl = 0; }, "k_icl");
  rejects([](RunConfig &c) { c.test_size = 0; }, "test_size");
  rejects([](RunConfig &c) { c.icl_strategy = "nearest"; }, "icl_strategy");
  rejects([](RunConfig &c) { c.linkage = "ward"; }, "linkage");
  rejects([](RunConfig &c) { c.cluster_threshold = 1.5; },
          "cluster_threshold");
  rejects([](RunConfig &c) { c.fp_radius = 7; }, "fp_radius");
  rejects([](RunConfig &c) { c.fp_width = 100; }, "fp_width");
  rejects([](RunConfig &c) { c.fp_width = 32; }, "fp_width");
  rejects([](RunConfig &c) { c.endpoint_kind = "grpc"; }, "endpoint_kind");
  rejects([](RunConfig &c) { c.endpoint_kind = "http"; }, "base_url");
  rejects([](RunConfig &c) { c.endpoint.max_in_flight = 0; },
          "max_in_flight");
  rejects([](RunConfig &c) { c.mock.kind = "chaos"; }, "mock.kind");
  rejects([](RunConfig &c) { c.mock.rank_policy = "longest"; },
          "rank_policy");
  rejects([](RunConfig &c) { c.output_dir.clear(); }, "output_dir");
  rejects([](RunConfig &c) { c.template_dir = "/missing/templates"; },
          "template_dir");
}
