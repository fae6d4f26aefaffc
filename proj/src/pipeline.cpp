#include "tabsynth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tabsynth/demo.hpp"
#include "tabsynth/encode.hpp"
#include "tabsynth/eval.hpp"
#include "tabsynth/format.hpp"
#include "tabsynth/hash.hpp"
#include "tabsynth/lineage.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/skew.hpp"
#include "tabsynth/table.hpp"
#include "tabsynth/tsne.hpp"
#include "tabsynth/version.hpp"

namespace tabsynth {

namespace {

namespace fs = std::filesystem;

struct Paths {
  fs::path out;
  fs::path ingest;
  fs::path variations;
  fs::path model;
  fs::path synth;
  fs::path report;
  fs::path lineage;
  fs::path runlog;
};

Paths make_paths(const RunConfig& cfg) {
  Paths p;
  p.out = cfg.out;
  p.ingest = cfg.out / "ingest";
  p.variations = cfg.out / "variations";
  p.model = cfg.out / "model";
  p.synth = cfg.out / "synth";
  p.report = cfg.out / "report";
  p.lineage = cfg.out / "lineage.log";
  p.runlog = cfg.out / "run.log";
  return p;
}

std::string utc_now_text() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void run_log_line(const Paths& p, const std::string& line) {
  std::ofstream log(p.runlog, std::ios::app);
  if (log) log << utc_now_text() << " " << line << "\n";
}

std::string sha256_file_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

Dataset load_ingested(const Paths& p) {
  fs::path schema_path = p.ingest / "schema.txt";
  fs::path data_path = p.ingest / "dataset.csv";
  if (!fs::exists(schema_path) || !fs::exists(data_path)) {
    throw DataError("ingest outputs not found under " + p.ingest.string() +
                    "; run the ingest stage first");
  }
  Schema schema = read_schema(schema_path);
  return parse_table(data_path, schema).dataset;
}

std::vector<std::string> variation_names(const Paths& p) {
  if (!fs::exists(p.variations)) {
    throw DataError("no variations under " + p.variations.string() + "; run the skew stage first");
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(p.variations)) {
    if (entry.path().extension() == ".csv") names.push_back(entry.path().stem().string());
  }
  if (names.empty()) throw DataError("no variation datasets under " + p.variations.string());
  std::sort(names.begin(), names.end());
  return names;
}

void stage_ingest(const RunConfig& cfg, const Paths& p) {
  std::optional<Schema> schema;
  if (cfg.schema) schema = read_schema(*cfg.schema);
  TableOptions options;
  if (!schema) options.sensitive = cfg.sensitive;
  ParsedTable parsed = parse_table(cfg.dataset, schema, options);
  Dataset d = std::move(parsed.dataset);
  if (cfg.sensitive) {
    d.schema.sensitive = cfg.sensitive;
    try {
      d.schema.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("sensitive designation: ") + e.what());
    }
  }
  if (!d.has_sensitive()) {
    throw ConfigError("no sensitive column designated (schema 'sensitive' line or config)");
  }

  fs::create_directories(p.ingest);
  write_schema(d.schema, p.ingest / "schema.txt");
  write_table(d, p.ingest / "dataset.csv");
  {
    std::ofstream info(p.ingest / "ingest.txt");
    info << "rows_kept " << parsed.report.rows_kept << "\n";
    info << "rows_dropped " << parsed.report.rows_dropped << "\n";
    info << "schema_hash " << d.schema.sha256_hex() << "\n";
  }

  nlohmann::ordered_json payload;
  payload["source"] = cfg.dataset.filename().string();
  payload["rows_kept"] = parsed.report.rows_kept;
  payload["rows_dropped"] = parsed.report.rows_dropped;
  payload["schema_hash"] = d.schema.sha256_hex();
  payload["outputs"] = {{"ingest/dataset.csv", sha256_file_hex(p.ingest / "dataset.csv")},
                        {"ingest/schema.txt", sha256_file_hex(p.ingest / "schema.txt")}};
  LineageLog(p.lineage.string()).append("ingest", payload.dump());
}

void stage_skew(const RunConfig& cfg, const Paths& p) {
  Dataset d = load_ingested(p);
  std::vector<SkewSpec> specs;
  if (cfg.suite == "standard") {
    specs = standard_variation_specs(conditional_counts(d), derive_seed(cfg.seed, "skew"));
  } else {
    specs = read_skew_specs(cfg.suite);
  }

  fs::create_directories(p.variations);
  nlohmann::ordered_json payload;
  payload["suite"] = (cfg.suite == "standard") ? "standard" : fs::path(cfg.suite).filename().string();
  payload["variations"] = nlohmann::ordered_json::array();
  for (const auto& spec : specs) {
    Dataset v = apply_skew(d, spec);
    fs::path csv = p.variations / (spec.name + ".csv");
    write_table(v, csv);
    write_skew_spec(spec, (p.variations / (spec.name + ".spec")).string());
    nlohmann::ordered_json vj;
    vj["name"] = spec.name;
    vj["rows"] = v.size();
    vj["counts"] = {spec.target[0], spec.target[1], spec.target[2], spec.target[3]};
    vj["digest"] = sha256_file_hex(csv);
    payload["variations"].push_back(std::move(vj));
  }
  LineageLog(p.lineage.string()).append("skew", payload.dump());
}

void stage_train(const RunConfig& cfg, const Paths& p) {
  Dataset d = load_ingested(p);
  TrainResult result = train_vae(d, cfg.arch, cfg.train);

  fs::create_directories(p.model);
  fs::path model_path = p.model / "vae.bin";
  save_vae(result.model, model_path.string());

  std::ofstream trace(p.model / "loss_trace.csv");
  trace << "epoch,train_ce,train_kl,train_total,val_ce,val_kl,val_total\n";
  for (std::size_t e = 0; e < result.trace.train.size(); ++e) {
    const LossParts& tr = result.trace.train[e];
    const LossParts& va = result.trace.validation[e];
    trace << e << ',' << format_g17(tr.ce) << ',' << format_g17(tr.kl) << ','
          << format_g17(tr.total) << ',' << format_g17(va.ce) << ',' << format_g17(va.kl) << ','
          << format_g17(va.total) << "\n";
  }
  trace.close();

  double best_val = std::numeric_limits<double>::quiet_NaN();
  for (const auto& vp : result.trace.validation) {
    if (std::isnan(best_val) || vp.total < best_val) best_val = vp.total;
  }

  nlohmann::ordered_json payload;
  payload["epochs_run"] = result.trace.train.size();
  payload["classes"] = cfg.arch.classes;
  payload["distributions"] = cfg.arch.distributions;
  payload["batch"] = cfg.train.batch;
  payload["lr"] = cfg.train.lr;
  payload["best_validation_total"] = std::isnan(best_val) ? nlohmann::ordered_json("nan")
                                                          : nlohmann::ordered_json(best_val);
  payload["outputs"] = {{"model/vae.bin", sha256_file_hex(model_path)},
                        {"model/loss_trace.csv", sha256_file_hex(p.model / "loss_trace.csv")}};
  LineageLog(p.lineage.string()).append("train", payload.dump());
}

void stage_synth(const RunConfig& cfg, const Paths& p) {
  Schema schema = read_schema(p.ingest / "schema.txt");
  fs::path model_path = p.model / "vae.bin";
  if (!fs::exists(model_path)) {
    throw DataError("model checkpoint not found at " + model_path.string() +
                    "; run the train stage first");
  }
  VaeModel model = load_vae(model_path.string());

  fs::create_directories(p.synth);
  nlohmann::ordered_json payload;
  payload["mode"] = (cfg.synth_mode == SynthMode::reconstruction) ? "reconstruction" : "prior";
  payload["outputs"] = nlohmann::ordered_json::array();
  for (const std::string& name : variation_names(p)) {
    Dataset real = parse_table(p.variations / (name + ".csv"), schema).dataset;
    Dataset synth =
        synthesize(model, real, real.size(), cfg.synth_mode, derive_seed(cfg.seed, "synth:" + name));
    fs::path out_csv = p.synth / (name + ".csv");
    write_table(synth, out_csv);
    nlohmann::ordered_json sj;
    sj["name"] = name;
    sj["rows"] = synth.size();
    sj["digest"] = sha256_file_hex(out_csv);
    payload["outputs"].push_back(std::move(sj));
  }
  LineageLog(p.lineage.string()).append("synthesize", payload.dump());
}

void stage_evaluate(const RunConfig& cfg, const Paths& p) {
  Schema schema = read_schema(p.ingest / "schema.txt");
  std::vector<std::string> names = variation_names(p);

  ExperimentResult result;
  result.run.k = cfg.k;
  std::optional<TsnePoints> tsne;
  std::string tsne_variation =
      std::find(names.begin(), names.end(), "full") != names.end() ? "full" : names.front();

  for (const std::string& name : names) {
    fs::path synth_csv = p.synth / (name + ".csv");
    if (!fs::exists(synth_csv)) {
      throw DataError("no synthetic counterpart for variation '" + name +
                      "'; run the synth stage first");
    }
    Dataset real = parse_table(p.variations / (name + ".csv"), schema).dataset;
    Dataset synth = parse_table(synth_csv, schema).dataset;
    result.run.variations.push_back(score_pair(name, real, synth, cfg.k));

    if (cfg.tsne_points > 0 && name == tsne_variation) {
      Rng sample_rng(derive_seed(cfg.seed, "tsne_sample"));
      auto subsample = [&sample_rng](const Dataset& d, Index cap) {
        std::vector<Index> ids(static_cast<std::size_t>(d.size()));
        std::iota(ids.begin(), ids.end(), Index{0});
        sample_rng.shuffle(ids);
        if (static_cast<Index>(ids.size()) > cap) ids.resize(static_cast<std::size_t>(cap));
        std::sort(ids.begin(), ids.end());
        return d.select(ids);
      };
      Dataset real_s = subsample(real, cfg.tsne_points);
      Dataset synth_s = subsample(synth, cfg.tsne_points);
      Matrix xr = one_hot_encode(real_s).values;
      Matrix xs = one_hot_encode(synth_s).values;
      Matrix stacked(xr.rows() + xs.rows(), xr.cols());
      stacked.topRows(xr.rows()) = xr;
      stacked.bottomRows(xs.rows()) = xs;

      TsneOptions topts;
      topts.seed = derive_seed(cfg.seed, "tsne");
      topts.perplexity = std::min(30.0, static_cast<double>(stacked.rows() - 1) / 3.0);
      TsneResult embedded = tsne_embed(stacked, topts);

      TsnePoints points;
      points.points = std::move(embedded.embedding);
      points.tags.assign(static_cast<std::size_t>(xr.rows()), "real");
      points.tags.insert(points.tags.end(), static_cast<std::size_t>(xs.rows()), "synthetic");
      tsne = std::move(points);
    }
  }
  if (result.run.variations.size() < 3) {
    throw DataError("experiment needs at least 3 variations, got " +
                    std::to_string(result.run.variations.size()));
  }
  result.correlation = metric_correlations(result.run);

  nlohmann::ordered_json header;
  header["dataset"] = cfg.dataset.filename().string();
  header["schema_hash"] = schema.sha256_hex();
  header["suite"] = (cfg.suite == "standard") ? "standard" : fs::path(cfg.suite).filename().string();
  header["seed"] = cfg.seed;
  header["k"] = cfg.k;
  header["classes"] = cfg.arch.classes;
  header["distributions"] = cfg.arch.distributions;
  header["epochs"] = cfg.train.epochs;
  header["batch"] = cfg.train.batch;
  header["lr"] = cfg.train.lr;
  header["tau"] = {cfg.train.tau_initial, cfg.train.tau_floor, cfg.train.tau_decay};
  header["synth_mode"] = (cfg.synth_mode == SynthMode::reconstruction) ? "reconstruction" : "prior";
  header["code_version"] = kCodeVersion;
  emit_reports(result, tsne, header, p.report.string());

  nlohmann::ordered_json payload;
  payload["variations"] = result.run.variations.size();
  payload["outputs"] = nlohmann::ordered_json::array();
  for (const char* f : {"report.json", "metrics.csv", "correlation.csv", "summary.txt"}) {
    nlohmann::ordered_json fj;
    fj["file"] = std::string("report/") + f;
    fj["digest"] = sha256_file_hex(p.report / f);
    payload["outputs"].push_back(std::move(fj));
  }
  if (tsne.has_value()) {
    nlohmann::ordered_json fj;
    fj["file"] = "report/tsne.csv";
    fj["digest"] = sha256_file_hex(p.report / "tsne.csv");
    payload["outputs"].push_back(std::move(fj));
  }
  LineageLog(p.lineage.string()).append("evaluate", payload.dump());
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  fs::path base = path.parent_path();
  auto resolve = [&base](const fs::path& p) { return p.is_absolute() ? p : base / p; };

  RunConfig cfg;
  bool have_dataset = false, have_out = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto bad = [&](const std::string& what) {
      return ConfigError("config line " + std::to_string(line_no) + ": " + what);
    };
    if (key == "dataset") {
      std::string v;
      if (!(ls >> v)) throw bad("missing dataset path");
      cfg.dataset = resolve(v);
      have_dataset = true;
    } else if (key == "schema") {
      std::string v;
      if (!(ls >> v)) throw bad("missing schema path");
      cfg.schema = resolve(v);
    } else if (key == "sensitive") {
      std::string col, bs, ws;
      if (!(ls >> col >> bs >> ws) || bs.rfind("b=", 0) != 0 || ws.rfind("w=", 0) != 0) {
        throw bad("expected: sensitive <column> b=<value> w=<value>");
      }
      cfg.sensitive = SensitiveSpec{col, bs.substr(2), ws.substr(2)};
    } else if (key == "suite") {
      std::string v;
      if (!(ls >> v)) throw bad("missing suite value");
      cfg.suite = (v == "standard") ? v : resolve(v).string();
    } else if (key == "out") {
      std::string v;
      if (!(ls >> v)) throw bad("missing out path");
      cfg.out = v;
      have_out = true;
    } else if (key == "seed") {
      if (!(ls >> cfg.seed)) throw bad("bad seed");
    } else if (key == "k") {
      if (!(ls >> cfg.k) || cfg.k <= 0) throw bad("k must be a positive integer");
    } else if (key == "epochs") {
      if (!(ls >> cfg.train.epochs) || cfg.train.epochs < 0) throw bad("bad epochs");
    } else if (key == "batch") {
      if (!(ls >> cfg.train.batch) || cfg.train.batch <= 0) throw bad("bad batch");
    } else if (key == "lr") {
      if (!(ls >> cfg.train.lr) || cfg.train.lr <= 0) throw bad("bad lr");
    } else if (key == "patience") {
      if (!(ls >> cfg.train.patience) || cfg.train.patience <= 0) throw bad("bad patience");
    } else if (key == "tau") {
      if (!(ls >> cfg.train.tau_initial >> cfg.train.tau_floor >> cfg.train.tau_decay)) {
        throw bad("expected: tau <initial> <floor> <decay>");
      }
    } else if (key == "classes") {
      if (!(ls >> cfg.arch.classes) || cfg.arch.classes <= 0) throw bad("bad classes");
    } else if (key == "distributions") {
      if (!(ls >> cfg.arch.distributions) || cfg.arch.distributions <= 0) {
        throw bad("bad distributions");
      }
    } else if (key == "encoder_hidden" || key == "decoder_hidden") {
      std::vector<Index>& widths =
          (key == "encoder_hidden") ? cfg.arch.encoder_hidden : cfg.arch.decoder_hidden;
      widths.clear();
      Index w;
      while (ls >> w) {
        if (w <= 0) throw bad("hidden widths must be positive");
        widths.push_back(w);
      }
      if (widths.empty()) throw bad("missing hidden widths");
    } else if (key == "synth_mode") {
      std::string v;
      ls >> v;
      if (v == "reconstruction") {
        cfg.synth_mode = SynthMode::reconstruction;
      } else if (v == "prior") {
        cfg.synth_mode = SynthMode::prior;
      } else {
        throw bad("synth_mode must be reconstruction or prior");
      }
    } else if (key == "tsne_points") {
      if (!(ls >> cfg.tsne_points) || cfg.tsne_points < 0) throw bad("bad tsne_points");
    } else {
      throw bad("unknown key '" + key + "'");
    }
  }
  if (!have_dataset) throw ConfigError("config is missing the 'dataset' line");
  if (!have_out) cfg.out = "out";

  if (const char* root = std::getenv("TABSYNTH_OUT_ROOT"); root != nullptr && *root != '\0') {
    if (cfg.out.is_relative()) cfg.out = fs::path(root) / cfg.out;
  } else if (cfg.out.is_relative()) {
    cfg.out = base / cfg.out;
  }

  if (!fs::exists(cfg.dataset)) throw ConfigError("dataset file not found: " + cfg.dataset.string());
  if (cfg.schema && !fs::exists(*cfg.schema)) {
    throw ConfigError("schema file not found: " + cfg.schema->string());
  }
  if (cfg.suite != "standard" && !fs::exists(cfg.suite)) {
    throw ConfigError("suite spec file not found: " + cfg.suite);
  }
  cfg.train.seed = derive_seed(cfg.seed, "train");
  return cfg;
}

void run_stage(const RunConfig& cfg, std::string_view stage) {
  Paths p = make_paths(cfg);
  auto t0 = std::chrono::steady_clock::now();
  if (stage == "ingest") {
    stage_ingest(cfg, p);
  } else if (stage == "skew") {
    stage_skew(cfg, p);
  } else if (stage == "train") {
    stage_train(cfg, p);
  } else if (stage == "synth") {
    stage_synth(cfg, p);
  } else if (stage == "evaluate") {
    stage_evaluate(cfg, p);
  } else {
    throw ConfigError("unknown stage '" + std::string(stage) + "'");
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
  run_log_line(p, std::string(stage) + " completed in " + std::to_string(ms.count()) + " ms");
}

void run_pipeline(const RunConfig& cfg) {
  for (const char* stage : kStageNames) run_stage(cfg, stage);
}

void write_demo_data(const fs::path& dir, Index rows, std::uint64_t seed) {
  Dataset d = generate_census_demo(rows, seed);
  fs::create_directories(dir);
  write_table(d, dir / "census.csv");
  write_schema(d.schema, dir / "census.schema");
  std::ofstream cfg(dir / "demo.cfg");
  cfg << "# ready-to-run configuration for the generated census sample\n"
      << "dataset census.csv\n"
      << "schema census.schema\n"
      << "suite standard\n"
      << "out run\n"
      << "seed 7\n";
}

}  // namespace tabsynth
