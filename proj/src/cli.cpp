#include "normsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "normsim/config.hpp"
#include "normsim/errors.hpp"
#include "normsim/metrics.hpp"
#include "normsim/render.hpp"

namespace normsim {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

void apply_provider_override(EpisodeConfig& cfg, const std::optional<ProviderKind>& override_kind) {
  if (override_kind) cfg.provider_kind = *override_kind;
}

// One exchange per line, flushed as soon as the exchange happens so the audit
// trail survives a crash mid-step.
EpisodeSinks audit_sink(std::ofstream& out, std::mutex& mutex) {
  EpisodeSinks sinks;
  sinks.on_exchange = [&out, &mutex](const ChatExchange& ex) {
    Json j;
    j["agent_id"] = ex.request.agent_id;
    j["time_step"] = ex.request.time_step;
    j["prompt_key"] = prompt_key(ex.request);
    j["system_message"] = ex.request.system_message;
    j["user_message"] = ex.request.user_message;
    j["response_text"] = ex.response_text;
    j["wall_time_ms"] = ex.wall_time.count();
    std::lock_guard<std::mutex> lock(mutex);
    out << j.dump() << "\n";
    out.flush();
  };
  return sinks;
}

bool uses_llm(const EpisodeConfig& cfg) {
  for (const auto& [id, binding] : cfg.policies) {
    if (binding.kind == PolicyKind::Llm) return true;
  }
  return false;
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const RunOptions& opts) {
  try {
    EpisodeConfig cfg = load_episode_config_file(config_path);
    apply_provider_override(cfg, opts.provider_override);
    std::filesystem::create_directories(opts.out_dir);

    const std::string stem = config_path.stem().string();
    const auto log_path = opts.out_dir / (stem + ".jsonl");

    EpisodeLog log;
    if (uses_llm(cfg)) {
      std::ofstream audit(opts.out_dir / (stem + ".exchanges.jsonl"), std::ios::binary);
      std::mutex audit_mutex;
      EpisodeSinks sinks = audit_sink(audit, audit_mutex);
      log = run_episode(cfg, nullptr, sinks);
    } else {
      log = run_episode(cfg);
    }
    write_file(log_path, log_to_jsonl(log));

    if (opts.render) {
      for (const WorldState& state : replay(log)) {
        std::cout << render_frame(state, cfg.scenario) << "\n";
      }
    }
    std::cout << "outcome: " << to_string(log.outcome) << " after " << log.steps.size()
              << " steps; log: " << log_path.string() << "\n";
    return log.outcome == EpisodeOutcome::Aborted ? 1 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_batch(const std::filesystem::path& batch_path, const BatchOptions& opts) {
  try {
    BatchSpec spec = load_batch_spec_file(batch_path);
    if (opts.provider_override) spec.provider_kind = *opts.provider_override;
    std::filesystem::create_directories(opts.out_dir);

    struct Job {
      int n_background;
      int index;
      std::filesystem::path path;
    };
    std::vector<Job> jobs;
    for (int n : spec.sweep) {
      for (int i = 0; i < spec.episodes_per_cell; ++i) {
        jobs.push_back({n, i,
                        opts.out_dir / ("ep_bv" + std::to_string(n) + "_" + std::to_string(i) +
                                        ".jsonl")});
      }
    }

    std::atomic<std::size_t> next{0};
    std::atomic<int> skipped{0};
    std::mutex io_mutex;
    std::vector<std::string> aborted;

    auto worker = [&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= jobs.size()) return;
        const Job& job = jobs[k];
        if (std::filesystem::exists(job.path)) {
          skipped.fetch_add(1);
          continue;
        }
        try {
          EpisodeConfig cfg = spec.episode_config(job.n_background, job.index);
          apply_provider_override(cfg, opts.provider_override);
          EpisodeLog log = run_episode(cfg);
          write_file(job.path, log_to_jsonl(log));
          if (log.outcome == EpisodeOutcome::Aborted) {
            std::lock_guard<std::mutex> lock(io_mutex);
            aborted.push_back(job.path.filename().string());
          }
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(io_mutex);
          aborted.push_back(job.path.filename().string() + " (" + e.what() + ")");
        }
      }
    };

    const int n_threads = std::max(1, opts.parallel);
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Summaries come from the logs on disk so resumed batches aggregate
    // everything, not just this invocation's episodes.
    std::vector<std::pair<int, BatchSummary>> rows;
    std::size_t loaded = 0;
    for (int n : spec.sweep) {
      std::vector<EpisodeLog> logs;
      for (int i = 0; i < spec.episodes_per_cell; ++i) {
        const auto path =
            opts.out_dir / ("ep_bv" + std::to_string(n) + "_" + std::to_string(i) + ".jsonl");
        if (std::filesystem::exists(path)) {
          logs.push_back(load_log(path.string()));
        }
      }
      loaded += logs.size();
      rows.emplace_back(n, summarize(logs));
    }
    write_file(opts.out_dir / "summary.csv", summary_table_csv(rows));

    if (skipped.load() > 0) {
      std::cout << "skipped " << skipped.load() << " already-completed episodes\n";
    }
    if (!aborted.empty()) {
      std::cerr << "aborted episodes:\n";
      for (const auto& name : aborted) std::cerr << "  " << name << "\n";
    }
    std::cout << "wrote " << (opts.out_dir / "summary.csv").string() << " over " << loaded
              << " episodes\n";
    return aborted.size() >= jobs.size() ? 1 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_report(const std::filesystem::path& logs_dir, const std::filesystem::path& out_dir) {
  try {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(logs_dir)) {
      for (const auto& entry : std::filesystem::directory_iterator(logs_dir)) {
        if (entry.path().extension() == ".jsonl" &&
            entry.path().string().find(".exchanges.") == std::string::npos) {
          files.push_back(entry.path());
        }
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      std::cerr << "error: no episode logs found in '" << logs_dir.string() << "'\n";
      return 1;
    }

    std::vector<EpisodeLog> logs;
    for (const auto& path : files) logs.push_back(load_log(path.string()));
    const BatchSummary summary = summarize(logs);
    std::filesystem::create_directories(out_dir);

    // Per-episode table.
    std::string table;
    if (summary.scenario == ScenarioKind::Intersection) {
      table = "episode,outcome,norm_adherent,early_stops_red,early_stops_green,yield_events,"
              "total_reward_red,total_reward_green\n";
    } else {
      table = "episode,outcome,platoon_success,lane_changes,platoon_time_fraction,"
              "total_reward_red,total_reward_green\n";
    }
    int index = 0;
    for (const auto& log : logs) {
      if (log.outcome == EpisodeOutcome::Aborted) continue;
      const EpisodeMetrics m = episode_metrics(log);
      char buf[512];
      if (summary.scenario == ScenarioKind::Intersection) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%d,%d,%d,%zu,%d,%d\n", index,
                      to_string(m.outcome).c_str(), m.norm_adherent ? 1 : 0,
                      m.early_stops.count("red") ? m.early_stops.at("red") : 0,
                      m.early_stops.count("green") ? m.early_stops.at("green") : 0,
                      m.yield_events.size(),
                      m.total_rewards.count("red") ? m.total_rewards.at("red") : 0,
                      m.total_rewards.count("green") ? m.total_rewards.at("green") : 0);
      } else {
        std::snprintf(buf, sizeof(buf), "%d,%s,%d,%zu,%.4f,%d,%d\n", index,
                      to_string(m.outcome).c_str(), m.platoon_success ? 1 : 0,
                      m.lane_changes.size(), m.platoon_time_fraction,
                      m.total_rewards.count("red") ? m.total_rewards.at("red") : 0,
                      m.total_rewards.count("green") ? m.total_rewards.at("green") : 0);
      }
      table += buf;
      ++index;
    }
    write_file(out_dir / "episode_metrics.csv", table);

    if (summary.scenario == ScenarioKind::Intersection) {
      std::string series = "episode,red,green\n";
      const auto& red = summary.early_stop_series.count("red")
                            ? summary.early_stop_series.at("red")
                            : std::vector<int>{};
      const auto& green = summary.early_stop_series.count("green")
                              ? summary.early_stop_series.at("green")
                              : std::vector<int>{};
      for (std::size_t i = 0; i < std::max(red.size(), green.size()); ++i) {
        series += std::to_string(i) + "," + std::to_string(i < red.size() ? red[i] : 0) + "," +
                  std::to_string(i < green.size() ? green[i] : 0) + "\n";
      }
      write_file(out_dir / "early_stops.csv", series);
    } else {
      std::string counts = "n_changes,red,green\n";
      for (const auto& [n, per_color] : summary.lane_change_count_hist) {
        counts += std::to_string(n) + "," +
                  std::to_string(per_color.count("red") ? per_color.at("red") : 0) + "," +
                  std::to_string(per_color.count("green") ? per_color.at("green") : 0) + "\n";
      }
      write_file(out_dir / "lane_change_counts.csv", counts);

      std::string times = "time_step,red,green\n";
      for (const auto& [t, per_color] : summary.lane_change_time_hist) {
        times += std::to_string(t) + "," +
                 std::to_string(per_color.count("red") ? per_color.at("red") : 0) + "," +
                 std::to_string(per_color.count("green") ? per_color.at("green") : 0) + "\n";
      }
      write_file(out_dir / "lane_change_times.csv", times);

      std::string fractions = "episode,platoon_time_fraction\n";
      for (std::size_t i = 0; i < summary.platoon_fractions.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu,%.4f\n", i, summary.platoon_fractions[i]);
        fractions += buf;
      }
      write_file(out_dir / "platoon_fractions.csv", fractions);

      std::string hist = "bin_lo,bin_hi,episodes\n";
      for (std::size_t b = 0; b < summary.platoon_fraction_hist.size(); ++b) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f,%d\n", b / 10.0, (b + 1) / 10.0,
                      summary.platoon_fraction_hist[b]);
        hist += buf;
      }
      write_file(out_dir / "platoon_fraction_hist.csv", hist);
    }

    std::cout << "report over " << summary.n_episodes << " episodes written to "
              << out_dir.string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_validate(const std::filesystem::path& config_path) {
  try {
    const Json j = read_json_file(config_path);
    if (is_batch_document(j)) {
      load_batch_spec_file(config_path);
      std::cout << "ok: valid batch spec\n";
    } else {
      load_episode_config_file(config_path);
      std::cout << "ok: valid episode config\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace normsim
