/*
 * Copyright 2026 The cropid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cropid/pipeline/stages.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "cropid/census/report.hpp"
#include "cropid/core/error.hpp"
#include "cropid/datagen/io.hpp"
#include "cropid/eval/report.hpp"
#include "cropid/model/checkpoint.hpp"
#include "cropid/model/train.hpp"

namespace cropid::pipeline {

using nlohmann::json;

namespace {

struct StageInfo {
  std::string name;
  std::string dir;
};

const std::vector<StageInfo>& stage_table() {
  static const std::vector<StageInfo> kStages = {
      {"synth", "synth"},         {"detect-seasons", "seasons"}, {"datagen", "dataset"},
      {"pretrain", "pretrain"},   {"finetune", "finetune"},      {"eval", "eval"},
      {"infer-monthly", "infer"}, {"census-report", "census"},
  };
  return kStages;
}

std::string num(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// Bookkeeping shared by every stage body.
class Run {
 public:
  Run(std::string stage, const PipelineConfig& config, const StageContext& ctx)
      : config_(config), ctx_(ctx), dir_(ctx.out / stage_dir(stage)) {
    manifest_.stage = std::move(stage);
    manifest_.seed = config.seed;
    manifest_.params = to_key_values(config);
  }

  const PipelineConfig& config() const { return config_; }
  const StageContext& ctx() const { return ctx_; }
  const fs::path& dir() const { return dir_; }
  RunManifest& manifest() { return manifest_; }

  /// Throws DependencyError unless the upstream stage has written its manifest.
  void require(const std::string& upstream) {
    const fs::path m = ctx_.out / stage_dir(upstream) / "manifest.json";
    if (!fs::exists(m)) {
      throw Error(ErrorCode::DependencyError, "stage '" + manifest_.stage + "' requires stage '" + upstream +
                                                  "' to run first (missing " + m.generic_string() + ")");
    }
    for (const auto& u : manifest_.upstream) {
      if (u.path == display_path(m, ctx_.out)) return;
    }
    manifest_.upstream.push_back(digest_of(m, ctx_.out));
  }

  /// An explicit config path must exist; an empty one falls back to the synth output.
  fs::path input(const std::string& configured, const std::string& synth_name) {
    if (!configured.empty()) {
      const fs::path p = configured;
      if (!fs::exists(p)) throw Error(ErrorCode::IoError, "input file not found: " + configured);
      return p;
    }
    require("synth");
    return ctx_.out / "synth" / synth_name;
  }

  void read(const fs::path& p) { manifest_.inputs.push_back(digest_of(p, ctx_.out)); }
  void wrote(const fs::path& p) { manifest_.outputs.push_back(digest_of(p, ctx_.out)); }
  void count(const std::string& name, long n) { manifest_.stage_counts.emplace_back(name, n); }

  void log(const std::string& line) const {
    if (ctx_.log) *ctx_.log << "[" << manifest_.stage << "] " << line << std::endl;
  }

 private:
  const PipelineConfig& config_;
  const StageContext& ctx_;
  fs::path dir_;
  RunManifest manifest_;
};

rsd::SensorLayout layout() { return rsd::SensorLayout::defaults(); }

fs::path run_dir(const fs::path& root, int run) { return root / ("run_" + std::to_string(run)); }

// ---------------------------------------------------------------------------------------------

void stage_synth(Run& run) {
  const auto& cfg = run.config();
  synth::SynthWorldConfig sc = cfg.synth;
  sc.seed = cfg.seed;
  synth::SynthWorld world = synth::generate_world(sc);
  const auto labels = synth::generate_labels(world, sc);
  const auto observations = synth::generate_observations(world, sc, run.ctx().threads);

  const fs::path d = run.dir();
  io::write_fields(d / "fields.json", world.fields);
  io::write_observations(d / "observations.jsonl", observations, layout());
  io::write_labels(d / "labels.jsonl", labels);
  write_truth(d / "truth.jsonl", world);
  io::write_text(d / "census.csv",
                 synth::census_csv(synth::census_from_truth(world, cfg.census_season_rule, cfg.census_year_start)));
  for (const char* name : {"fields.json", "observations.jsonl", "labels.jsonl", "truth.jsonl", "census.csv"}) {
    run.wrote(d / name);
  }

  long seasons = 0;
  for (const auto& f : world.truth.fields) seasons += static_cast<long>(f.seasons.size());
  std::map<synth::LabelTag, long> tags;
  for (const auto& l : world.truth.labels) ++tags[l.tag];
  run.count("fields", static_cast<long>(world.fields.size()));
  run.count("true_seasons", seasons);
  run.count("labels", static_cast<long>(labels.size()));
  for (auto tag : {synth::LabelTag::Clean, synth::LabelTag::OffField, synth::LabelTag::OffSeason}) {
    run.count("labels_" + std::string(synth::to_string(tag)), tags[tag]);
  }
  run.log(std::to_string(world.fields.size()) + " fields, " + std::to_string(labels.size()) + " labels");
}

void stage_detect(Run& run) {
  const auto& cfg = run.config();
  const fs::path fields_path = run.input(cfg.fields_path, "fields.json");
  const fs::path obs_path = run.input(cfg.observations_path, "observations.jsonl");
  run.read(fields_path);
  run.read(obs_path);
  const auto fields = io::read_fields(fields_path);
  const auto obs = io::read_observations(obs_path, layout());

  std::vector<io::FieldSeasons> out(fields.size());
  std::vector<int> empty(fields.size(), 0);
  parallel_for(fields.size(), run.ctx().threads, [&](std::size_t i) {
    out[i].field_id = fields[i].field_id;
    const auto it = obs.find(fields[i].field_id);
    if (it == obs.end()) {
      empty[i] = 1;
      return;
    }
    const auto points = datagen::interior_series(fields[i], it->second, cfg.datagen.inset_m);
    if (points.empty()) {
      empty[i] = 1;
      return;
    }
    try {
      out[i].seasons =
          season::detect_seasons(datagen::field_detection_series(points), layout(), cfg.datagen.detection);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyTrace && e.code() != ErrorCode::EmptyStream) throw;
      empty[i] = 1;
    }
  });

  const fs::path dest = run.ctx().seasons_output.empty() ? run.dir() / "seasons.jsonl"
                                                         : fs::path(run.ctx().seasons_output);
  io::write_seasons(dest, out);
  run.wrote(dest);
  long seasons = 0, no_data = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    seasons += static_cast<long>(out[i].seasons.size());
    no_data += empty[i];
  }
  run.count("fields", static_cast<long>(fields.size()));
  run.count("fields_without_trace", no_data);
  run.count("seasons", seasons);
}

void stage_datagen(Run& run) {
  const auto& cfg = run.config();
  const fs::path fields_path = run.input(cfg.fields_path, "fields.json");
  const fs::path labels_path = run.input(cfg.labels_path, "labels.jsonl");
  const fs::path obs_path = run.input(cfg.observations_path, "observations.jsonl");
  for (const auto& p : {fields_path, labels_path, obs_path}) run.read(p);
  const auto fields = io::read_fields(fields_path);
  const auto labels = io::read_labels(labels_path);
  const auto obs = io::read_observations(obs_path, layout());

  json runs = json::array();
  for (int k = 0; k < cfg.runs; ++k) {
    datagen::DatagenParams p = cfg.datagen;
    p.seed = cfg.dataset_seed(k);
    p.pad_length = cfg.model.pad_length;
    p.threads = run.ctx().threads;
    if (k > 0) p.unlabeled_per_field = 0;  // pre-training consumes run 0 only
    const auto splits = datagen::build_dataset(labels, fields, obs, layout(), p);

    const fs::path d = run_dir(run.dir(), k);
    io::write_examples(d / "train.jsonl", splits.train);
    io::write_examples(d / "validation.jsonl", splits.validation);
    io::write_examples(d / "test.jsonl", splits.test);
    io::write_json(d / "norm_stats.json", io::to_json(splits.norm_stats));
    for (const char* name : {"train.jsonl", "validation.jsonl", "test.jsonl", "norm_stats.json"}) run.wrote(d / name);
    if (k == 0) {
      io::write_unlabeled(d / "unlabeled.jsonl", splits.unlabeled);
      run.wrote(d / "unlabeled.jsonl");
      for (const auto& [name, n] : splits.stage_counts) run.count(name, n);
      std::map<std::string, long> reasons;
      for (const auto& o : splits.label_outcomes) {
        if (o.reason) ++reasons[std::string(datagen::to_string(*o.reason))];
      }
      for (const auto& [name, n] : reasons) run.count("rejected_" + name, n);
    }
    run.count("run_" + std::to_string(k) + "_train", static_cast<long>(splits.train.size()));
    run.count("run_" + std::to_string(k) + "_validation", static_cast<long>(splits.validation.size()));
    run.count("run_" + std::to_string(k) + "_test", static_cast<long>(splits.test.size()));
    runs.push_back({{"run", k},
                    {"seed", p.seed},
                    {"ratios", {{"train", p.ratios.train}, {"validation", p.ratios.validation}, {"test", p.ratios.test}}},
                    {"norm_stats", io::to_json(splits.norm_stats)}});
    run.log("run " + std::to_string(k) + ": " + std::to_string(splits.train.size()) + " train / " +
            std::to_string(splits.validation.size()) + " validation / " + std::to_string(splits.test.size()) +
            " test examples");
  }
  run.manifest().summary["runs"] = runs;
}

std::string history_csv(const std::vector<model::HistoryEntry>& history) {
  std::ostringstream out;
  out << "step,score,train_loss,heldout_mse\n";
  for (const auto& h : history) {
    out << h.step << "," << num(h.score) << "," << num(h.train_loss) << "," << num(h.heldout_mse) << "\n";
  }
  return out.str();
}

model::ModelConfig run_model_config(const PipelineConfig& cfg, int run) {
  model::ModelConfig mc = cfg.model;
  mc.seed = cfg.model_seed(run);
  return mc;
}

model::TrainOptions train_options(const Run& run, int steps) {
  const auto& mc = run.config().model;
  model::TrainOptions opt;
  opt.steps = steps;
  opt.batch_size = mc.batch_size;
  opt.validate_every = mc.validate_every;
  opt.threads = run.ctx().threads;
  opt.on_validate = [&run](int step, double score, double loss) {
    run.log("step " + std::to_string(step) + " score " + num(score) + " loss " + num(loss));
  };
  return opt;
}

void stage_pretrain(Run& run) {
  const auto& cfg = run.config();
  run.require("datagen");
  const fs::path d = run_dir(run.ctx().out / "dataset", 0);
  for (const char* name : {"unlabeled.jsonl", "train.jsonl", "validation.jsonl", "norm_stats.json"}) run.read(d / name);
  const auto unlabeled = io::read_unlabeled(d / "unlabeled.jsonl");
  const auto train = io::read_examples(d / "train.jsonl");
  const auto validation = io::read_examples(d / "validation.jsonl");
  const auto stats = io::norm_stats_from_json(io::read_json(d / "norm_stats.json"));

  std::vector<const rsd::PaddedSeries*> pool, heldout;
  for (const auto& ex : unlabeled) (ex.split == datagen::Split::Train ? pool : heldout).push_back(&ex.series);
  if (pool.empty()) throw Error(ErrorCode::EmptyInput, "no unlabeled training examples for pre-training");
  if (heldout.empty()) {
    for (const auto& ex : validation) heldout.push_back(&ex.series);
  }

  model::Model m(run_model_config(cfg, 0), layout());
  const auto result = model::pretrain(m, pool, model::view_of(train), model::view_of(validation), heldout,
                                      train_options(run, cfg.model.pretrain_steps));
  const fs::path out = run.dir();
  model::save_checkpoint(out / "checkpoint.json",
                         model::make_checkpoint(m, "pretrain", result.best_step, result.best_score, stats));
  io::write_text(out / "history.csv", history_csv(result.history));
  run.wrote(out / "checkpoint.json");
  run.wrote(out / "history.csv");
  run.count("unlabeled_train", static_cast<long>(pool.size()));
  run.count("unlabeled_heldout", static_cast<long>(heldout.size()));
  run.count("steps", cfg.model.pretrain_steps);
  run.manifest().summary = {{"best_step", result.best_step}, {"best_probe_f1", result.best_score}};
}

void stage_finetune(Run& run) {
  const auto& cfg = run.config();
  run.require("datagen");
  std::optional<model::Checkpoint> pretrained;
  if (cfg.finetune_from_pretrained) {
    run.require("pretrain");
    const fs::path p = run.ctx().out / "pretrain" / "checkpoint.json";
    run.read(p);
    pretrained = model::load_checkpoint(p);
  }
  json runs = json::array();
  for (int k = 0; k < cfg.runs; ++k) {
    const fs::path d = run_dir(run.ctx().out / "dataset", k);
    for (const char* name : {"train.jsonl", "validation.jsonl", "norm_stats.json"}) run.read(d / name);
    const auto train = io::read_examples(d / "train.jsonl");
    const auto validation = io::read_examples(d / "validation.jsonl");
    const auto stats = io::norm_stats_from_json(io::read_json(d / "norm_stats.json"));

    model::Model m(run_model_config(cfg, k), layout());
    long copied = 0;
    if (pretrained) {
      copied = static_cast<long>(model::load_matching(m.params(), pretrained->params));
      m.reset_classifier(cfg.model_seed(k));
    }
    run.log("run " + std::to_string(k) + (pretrained ? " from pre-trained encoder" : " from scratch"));
    const auto result =
        model::finetune(m, model::view_of(train), model::view_of(validation), train_options(run, cfg.model.finetune_steps));
    const fs::path out = run_dir(run.dir(), k);
    model::save_checkpoint(out / "checkpoint.json",
                           model::make_checkpoint(m, "finetune", result.best_step, result.best_score, stats));
    io::write_text(out / "history.csv", history_csv(result.history));
    run.wrote(out / "checkpoint.json");
    run.wrote(out / "history.csv");
    run.count("run_" + std::to_string(k) + "_copied_parameters", copied);
    runs.push_back({{"run", k},
                    {"best_step", result.best_step},
                    {"best_validation_f1", result.best_score},
                    {"first_step_f1_0.9", result.first_step_reaching(0.9)}});
  }
  run.manifest().summary["runs"] = runs;
}

json record_json(const eval::PredictionRecord& r, const datagen::InSeasonExample& ex) {
  return {{"field_id", r.field_id},
          {"label_id", ex.label_id},
          {"truth", std::string(crop_name(r.truth))},
          {"predicted", std::string(crop_name(crop_from_index(eval::predicted_class(r.probs))))},
          {"days_after_start", r.days_after_start},
          {"season", std::string(eval::to_string(r.season))},
          {"probs", r.probs}};
}

void stage_eval(Run& run) {
  const auto& cfg = run.config();
  run.require("finetune");
  std::vector<std::vector<eval::PredictionRecord>> all_runs;
  std::vector<eval::PredictionRecord> pooled;
  json metrics = json::array();
  for (int k = 0; k < cfg.runs; ++k) {
    const fs::path ckpt_path = run_dir(run.ctx().out / "finetune", k) / "checkpoint.json";
    const fs::path test_path = run_dir(run.ctx().out / "dataset", k) / "test.jsonl";
    run.read(ckpt_path);
    run.read(test_path);
    const auto model = model::model_from_checkpoint(model::load_checkpoint(ckpt_path));
    const auto test = io::read_examples(test_path);
    std::vector<const rsd::PaddedSeries*> series;
    for (const auto& ex : test) series.push_back(&ex.series);
    const auto probs = model::predict_all(model, series, run.ctx().threads);

    std::vector<eval::PredictionRecord> records;
    std::string jsonl;
    for (std::size_t i = 0; i < test.size(); ++i) {
      eval::PredictionRecord r;
      r.field_id = test[i].field_id;
      r.probs = probs[i];
      r.truth = test[i].label;
      r.days_after_start = test[i].days_after_start;
      r.season = eval::season_tag(test[i].label_day, cfg.eval_season_rule);
      jsonl += record_json(r, test[i]).dump() + "\n";
      records.push_back(r);
    }
    const fs::path pred_path = run.dir() / ("predictions_run_" + std::to_string(k) + ".jsonl");
    io::write_text(pred_path, jsonl);
    run.wrote(pred_path);

    const double f1 = eval::macro_f1(eval::precision_recall(records));
    metrics.push_back({{"run", k}, {"test_examples", records.size()}, {"macro_f1", std::isnan(f1) ? json() : json(f1)}});
    run.log("run " + std::to_string(k) + " test macro-F1 " + num(f1));
    pooled.insert(pooled.end(), records.begin(), records.end());
    all_runs.push_back(std::move(records));
  }

  for (auto season : {eval::SeasonTag::Winter, eval::SeasonTag::Monsoon}) {
    for (const auto& table : eval::report_tables(all_runs, season)) {
      io::write_text(run.dir() / table.name, table.csv);
      run.wrote(run.dir() / table.name);
    }
  }
  io::write_text(run.dir() / "sweep.csv", eval::sweep_csv(eval::confidence_sweep(pooled, cfg.confidence_thresholds)));
  run.wrote(run.dir() / "sweep.csv");
  io::write_json(run.dir() / "metrics.json", {{"runs", metrics}});
  run.wrote(run.dir() / "metrics.json");
  run.count("records", static_cast<long>(pooled.size()));
  run.manifest().summary["runs"] = metrics;
}

void stage_infer(Run& run) {
  const auto& cfg = run.config();
  run.require("finetune");
  const fs::path fields_path = run.input(cfg.fields_path, "fields.json");
  const fs::path obs_path = run.input(cfg.observations_path, "observations.jsonl");
  run.read(fields_path);
  run.read(obs_path);
  const auto fields = io::read_fields(fields_path);
  const auto obs = io::read_observations(obs_path, layout());

  std::vector<model::Checkpoint> ckpts;
  for (int k = 0; k < cfg.runs; ++k) {
    const fs::path p = run_dir(run.ctx().out / "finetune", k) / "checkpoint.json";
    run.read(p);
    ckpts.push_back(model::load_checkpoint(p));
  }
  std::vector<model::Model> models;
  for (const auto& c : ckpts) models.push_back(model::model_from_checkpoint(c));
  std::vector<census::EnsembleMember> ensemble;
  for (std::size_t i = 0; i < models.size(); ++i) ensemble.push_back({&models[i], &ckpts[i].norm_stats});

  census::InferenceOptions opt;
  opt.first_month = cfg.infer_first_month;
  opt.last_month = cfg.infer_last_month;
  opt.detection = cfg.datagen.detection;
  opt.inset_m = cfg.datagen.inset_m;
  opt.pad_length = cfg.model.pad_length;
  opt.threads = run.ctx().threads;
  const auto predictions = census::monthly_inference(fields, obs, layout(), ensemble, opt);
  census::write_predictions(run.dir() / "predictions.jsonl", predictions);
  run.wrote(run.dir() / "predictions.jsonl");
  run.count("fields", static_cast<long>(fields.size()));
  run.count("predictions", static_cast<long>(predictions.size()));
  run.count("final_seasons", static_cast<long>(census::final_predictions(predictions).size()));
}

void stage_census(Run& run) {
  const auto& cfg = run.config();
  fs::path pred_path;
  if (run.ctx().predictions.empty()) {
    run.require("infer-monthly");
    pred_path = run.ctx().out / "infer" / "predictions.jsonl";
  } else {
    pred_path = run.ctx().predictions;
    if (fs::is_directory(pred_path)) pred_path /= "predictions.jsonl";
    if (!fs::exists(pred_path)) throw Error(ErrorCode::IoError, "predictions not found: " + pred_path.generic_string());
  }
  const fs::path census_path = run.input(cfg.census_path, "census.csv");
  run.read(pred_path);
  run.read(census_path);
  const auto monthly = census::read_predictions(pred_path);
  const auto table = census::read_census_csv(census_path);

  census::ReportOptions opt;
  opt.rule = cfg.census_season_rule;
  opt.year_start = cfg.census_year_start;
  opt.cosine_form = cfg.cosine_form;
  opt.charts = cfg.charts;
  const auto files = census::emit_census_report(monthly, table, opt, run.dir());
  for (const auto& name : files.written) run.wrote(run.dir() / name);
  for (const auto& w : files.warnings) run.log("warning: " + w);

  json reports = json::array();
  for (const auto& r : census::build_reports(census::final_predictions(monthly), table, opt)) {
    reports.push_back({{"region", r.region}, {"season", std::string(eval::to_string(r.season))}, {"cosine", r.cosine}});
  }
  run.manifest().summary = {{"reports", reports}, {"warnings", files.warnings}};
  run.count("predictions", static_cast<long>(monthly.size()));
  run.count("census_entries", static_cast<long>(table.entries.size()));
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto& s : stage_table()) names.push_back(s.name);
    return names;
  }();
  return kNames;
}

std::string stage_dir(const std::string& stage) {
  for (const auto& s : stage_table()) {
    if (s.name == stage) return s.dir;
  }
  throw Error(ErrorCode::ConfigError, "unknown stage '" + stage + "'");
}

RunManifest run_stage(const std::string& stage, const PipelineConfig& config, const StageContext& context) {
  stage_dir(stage);
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Run run(stage, config, context);
  if (stage == "synth") stage_synth(run);
  else if (stage == "detect-seasons") stage_detect(run);
  else if (stage == "datagen") stage_datagen(run);
  else if (stage == "pretrain") stage_pretrain(run);
  else if (stage == "finetune") stage_finetune(run);
  else if (stage == "eval") stage_eval(run);
  else if (stage == "infer-monthly") stage_infer(run);
  else stage_census(run);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.manifest().timings_s["total"] = seconds;
  write_manifest(run.dir(), run.manifest());
  return run.manifest();
}

void write_truth(const fs::path& path, const synth::SynthWorld& world) {
  std::string text;
  for (const auto& f : world.truth.fields) {
    json seasons = json::array();
    for (const auto& s : f.seasons) {
      seasons.push_back({{"crop", s.crop_name}, {"start", format_iso_date(s.start)}, {"end", format_iso_date(s.end)}});
    }
    json points = json::array();
    for (const auto& p : f.points) points.push_back({io::round6(p.lat), io::round6(p.lng)});
    text += json{{"type", "field"}, {"field_id", f.field_id}, {"seasons", seasons}, {"points", points}}.dump() + "\n";
  }
  for (const auto& l : world.truth.labels) {
    text += json{{"type", "label"},
                 {"label_id", l.label_id},
                 {"field_id", l.field_id},
                 {"season_index", l.season_index},
                 {"tag", std::string(synth::to_string(l.tag))}}
                .dump() +
            "\n";
  }
  io::write_text(path, text);
}

synth::SynthTruth read_truth(const fs::path& path) {
  synth::SynthTruth truth;
  io::for_each_jsonl(path, [&](const json& rec, std::size_t) {
    if (rec.at("type") == "field") {
      synth::FieldTruth f;
      f.field_id = rec.at("field_id").get<std::string>();
      for (const auto& s : rec.at("seasons")) {
        synth::TrueSeason ts;
        ts.crop_name = s.at("crop").get<std::string>();
        ts.crop = group_crop(ts.crop_name);
        ts.start = parse_iso_date(s.at("start").get<std::string>());
        ts.end = parse_iso_date(s.at("end").get<std::string>());
        f.seasons.push_back(ts);
      }
      for (const auto& p : rec.at("points")) f.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      truth.fields.push_back(std::move(f));
    } else {
      synth::LabelTruth l;
      l.label_id = rec.at("label_id").get<std::string>();
      l.field_id = rec.at("field_id").get<std::string>();
      l.season_index = rec.at("season_index").get<int>();
      l.tag = synth::parse_label_tag(rec.at("tag").get<std::string>());
      truth.labels.push_back(std::move(l));
    }
  });
  return truth;
}

}  // namespace cropid::pipeline
