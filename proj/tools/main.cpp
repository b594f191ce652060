#include <CLI11.hpp>

#include <optional>
#include <string>

#include "normsim/cli.hpp"

namespace {

std::optional<normsim::ProviderKind> parse_provider(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return normsim::provider_kind_from_string(value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid driving Markov-game simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  std::string provider;
  std::string logs_dir;
  bool render = false;
  int parallel = 1;

  auto* run = app.add_subcommand("run", "run one episode from a config file");
  run->add_option("--config", config, "episode config (JSON)")->required();
  run->add_flag("--render", render, "print an ASCII frame per step");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--provider", provider, "override provider: remote or mock")
      ->check(CLI::IsMember({"remote", "mock"}));

  auto* batch = app.add_subcommand("batch", "run a sweep of episodes");
  batch->add_option("--config", config, "batch spec (JSON)")->required();
  batch->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  batch->add_option("--out", out_dir, "output directory");
  batch->add_option("--provider", provider, "override provider: remote or mock")
      ->check(CLI::IsMember({"remote", "mock"}));

  auto* report = app.add_subcommand("report", "aggregate a directory of episode logs");
  report->add_option("--logs", logs_dir, "directory of .jsonl episode logs")->required();
  report->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config, "episode or batch config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      normsim::RunOptions opts;
      opts.render = render;
      opts.out_dir = out_dir;
      opts.provider_override = parse_provider(provider);
      return normsim::cmd_run(config, opts);
    }
    if (batch->parsed()) {
      normsim::BatchOptions opts;
      opts.parallel = parallel;
      opts.out_dir = out_dir;
      opts.provider_override = parse_provider(provider);
      return normsim::cmd_batch(config, opts);
    }
    if (report->parsed()) {
      return normsim::cmd_report(logs_dir, out_dir);
    }
    return normsim::cmd_validate(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
