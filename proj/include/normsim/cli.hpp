#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "normsim/llm.hpp"

namespace normsim {

struct RunOptions {
  bool render = false;
  std::filesystem::path out_dir = "out";
  std::optional<ProviderKind> provider_override;
};

struct BatchOptions {
  int parallel = 1;
  std::filesystem::path out_dir = "out";
  std::optional<ProviderKind> provider_override;
};

/// Run one episode from a config file; writes <stem>.jsonl (plus an exchange
/// audit file when a provider is involved) under out_dir and optionally plays
/// the episode back as ASCII frames on stdout.
int cmd_run(const std::filesystem::path& config_path, const RunOptions& opts);

/// Run a sweep; writes one log per episode plus summary.csv in table shape.
/// Episodes whose log already exists are skipped, so interrupted batches
/// resume. Returns nonzero only if every episode aborted.
int cmd_batch(const std::filesystem::path& batch_path, const BatchOptions& opts);

/// Aggregate a directory of episode logs into per-episode metric tables and
/// histogram series files.
int cmd_report(const std::filesystem::path& logs_dir, const std::filesystem::path& out_dir);

/// Parse + validate a config (episode or batch) and report the first problem.
int cmd_validate(const std::filesystem::path& config_path);

}  // namespace normsim
