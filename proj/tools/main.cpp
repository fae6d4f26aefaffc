// tabsynth command line front end. Stages read and write serialized
// intermediates under the run directory, so each subcommand can rerun its
// stage in isolation.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tabsynth/lineage.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/pipeline.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> suite;
  std::optional<tabsynth::Index> k;
  std::optional<std::string> mode;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "master seed override");
  cmd->add_option("--out", ov.out, "output directory override");
  cmd->add_option("--suite", ov.suite, "variation suite override: standard or a spec file");
  cmd->add_option("--k", ov.k, "neighbor count for the consistency metric");
  cmd->add_option("--mode", ov.mode, "synthesis mode: reconstruction or prior");
}

tabsynth::RunConfig load_config(const std::string& config_path, const Overrides& ov) {
  tabsynth::RunConfig cfg = tabsynth::load_run_config(config_path);
  if (ov.seed) {
    cfg.seed = *ov.seed;
    cfg.train.seed = tabsynth::derive_seed(cfg.seed, "train");
  }
  if (ov.out) {
    fs::path p = *ov.out;
    const char* root = std::getenv("TABSYNTH_OUT_ROOT");
    if (p.is_relative() && root != nullptr && *root != '\0') {
      cfg.out = fs::path(root) / p;
    } else {
      cfg.out = fs::absolute(p);
    }
  }
  if (ov.suite) {
    if (*ov.suite == "standard") {
      cfg.suite = *ov.suite;
    } else {
      fs::path p = fs::absolute(*ov.suite);
      if (!fs::exists(p)) throw tabsynth::ConfigError("suite spec file not found: " + p.string());
      cfg.suite = p.string();
    }
  }
  if (ov.k) {
    if (*ov.k <= 0) throw tabsynth::ConfigError("k must be a positive integer");
    cfg.k = *ov.k;
  }
  if (ov.mode) {
    if (*ov.mode == "reconstruction") {
      cfg.synth_mode = tabsynth::SynthMode::reconstruction;
    } else if (*ov.mode == "prior") {
      cfg.synth_mode = tabsynth::SynthMode::prior;
    } else {
      throw tabsynth::ConfigError("mode must be reconstruction or prior");
    }
  }
  return cfg;
}

// Loads the serialized ingest outputs of an existing run directory.
tabsynth::Dataset load_ingested(const tabsynth::RunConfig& cfg) {
  fs::path schema_path = cfg.out / "ingest" / "schema.txt";
  fs::path data_path = cfg.out / "ingest" / "dataset.csv";
  if (!fs::exists(schema_path) || !fs::exists(data_path)) {
    throw tabsynth::DataError("ingest outputs not found under " + (cfg.out / "ingest").string() +
                              "; run the ingest stage first");
  }
  tabsynth::Schema schema = tabsynth::read_schema(schema_path);
  return tabsynth::parse_table(data_path, schema).dataset;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"categorical tabular data synthesis with fairness evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::string stage;
  std::string log_path;
  std::string demo_dir = "demo";
  tabsynth::Index demo_rows = 5000;
  std::uint64_t demo_seed = 7;
  std::function<void()> action;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration file")->required();
    add_override_flags(cmd, ov);
  };

  CLI::App* run = app.add_subcommand("run", "execute the full pipeline");
  add_config(run);
  run->add_option("--stage", stage, "run one stage only: ingest, skew, train, synth or evaluate");
  run->callback([&] {
    action = [&] {
      tabsynth::RunConfig cfg = load_config(config_path, ov);
      if (stage.empty()) {
        tabsynth::run_pipeline(cfg);
      } else {
        tabsynth::run_stage(cfg, stage);
      }
      std::cout << "run directory: " << cfg.out.string() << "\n";
    };
  });

  for (const char* name : tabsynth::kStageNames) {
    CLI::App* cmd = app.add_subcommand(name, std::string("run the ") + name + " stage");
    add_config(cmd);
    cmd->callback([&, name] {
      action = [&, name] { tabsynth::run_stage(load_config(config_path, ov), name); };
    });
  }

  CLI::App* metrics = app.add_subcommand("metrics", "print the six bias metrics of the ingested data");
  add_config(metrics);
  metrics->callback([&] {
    action = [&] {
      tabsynth::RunConfig cfg = load_config(config_path, ov);
      tabsynth::Dataset d = load_ingested(cfg);
      std::cout << tabsynth::report_text(tabsynth::full_report(d, cfg.k));
    };
  });

  CLI::App* verify = app.add_subcommand("verify-log", "verify a lineage log's hash chain");
  verify->add_option("log", log_path, "lineage log path (default: <out>/lineage.log from --config)");
  verify->add_option("--config", config_path, "run configuration file");
  add_override_flags(verify, ov);
  verify->callback([&] {
    action = [&] {
      std::string path = log_path;
      if (path.empty()) {
        if (config_path.empty()) {
          throw tabsynth::ConfigError("verify-log needs a log path or --config");
        }
        path = (load_config(config_path, ov).out / "lineage.log").string();
      }
      tabsynth::VerifyResult r = tabsynth::LineageLog::verify(path);
      if (!r.ok) {
        throw tabsynth::VerifyError("lineage verification failed at seq " +
                                    std::to_string(r.broken_seq) + ": " + r.reason);
      }
      std::cout << "ok: " << tabsynth::LineageLog::read_events(path).size() << " events\n";
    };
  });

  CLI::App* demo = app.add_subcommand("demo-data", "generate the bundled census-style sample");
  demo->add_option("--out", demo_dir, "directory for census.csv, census.schema and demo.cfg");
  demo->add_option("--rows", demo_rows, "number of records")->check(CLI::PositiveNumber);
  demo->add_option("--seed", demo_seed, "generator seed");
  demo->callback([&] {
    action = [&] {
      tabsynth::write_demo_data(demo_dir, demo_rows, demo_seed);
      std::cout << "demo data written to " << fs::absolute(demo_dir).string() << "\n";
    };
  });

  try {
    app.parse(argc, argv);
    if (action) action();
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const tabsynth::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tabsynth::TrainError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 4;
  } catch (const tabsynth::VerifyError& e) {
    std::cerr << "verification error: " << e.what() << "\n";
    return 5;
  } catch (const tabsynth::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
