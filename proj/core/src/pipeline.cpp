#include "cdel/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cdel/csv.hpp"
#include "cdel/errors.hpp"
#include "cdel/io.hpp"
#include "cdel/random.hpp"

namespace cdel {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Seed streams for the pipeline's own stochastic steps; model init/shuffle/dropout
// derive theirs inside train_model.
constexpr std::uint64_t kStreamKMeans = 10;
constexpr std::uint64_t kStreamSpectral = 11;
constexpr std::uint64_t kStreamDevSplit = 20;
constexpr std::uint64_t kStreamFolds = 21;

const fs::path& require(const fs::path& p, std::string_view key) {
  if (p.empty()) throw ConfigError("config key '" + std::string(key) + "' is required for this command");
  if (!fs::exists(p)) {
    throw ConfigError("config key '" + std::string(key) + "': file '" + p.string() + "' does not exist");
  }
  return p;
}

std::optional<EmbeddingMatrix> load_optional(const fs::path& p, std::string_view key) {
  if (p.empty()) return std::nullopt;
  return io::load_embeddings(require(p, key));
}

Json scores_json(const ValidityScores& s) {
  Json j;
  if (s.t) j["t"] = *s.t;
  j["num_clusters"] = s.c;
  // JSON has no infinity; a saturated index is written as null.
  auto real = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  j["sc"] = real(s.sc);
  j["chs"] = real(s.chs);
  j["dbi"] = real(s.dbi);
  return j;
}

Json header(std::string_view format, const RunConfig& cfg) {
  Json j;
  j["format"] = std::string(format);
  j["config_hash"] = cfg.hash();
  return j;
}

void write_json(const fs::path& path, const Json& doc) { io::write_file_atomic(path, doc.dump(2) + "\n"); }

EmbeddingMatrix restrict_to(const EmbeddingMatrix& emb, const SampleTable& samples) {
  std::vector<std::string> keep;
  for (const auto& id : emb.ids()) {
    if (samples.contains(id)) keep.push_back(id);
  }
  if (keep.empty()) return EmbeddingMatrix({}, Eigen::MatrixXd(0, emb.dim()));
  return emb.select(keep);
}

std::optional<ValidityScores> try_score(const DistanceMatrix& dm, const EmbeddingMatrix& emb,
                                        const ClusterAssignment& assign) {
  const auto c = assign.cluster_count();
  if (c < 2 || c > static_cast<int>(assign.size()) - 1) return std::nullopt;
  return score_partition(dm, emb, assign);
}

// Everything a command needs from the data files, loaded once.
struct Inputs {
  std::optional<EmbeddingMatrix> text;
  std::optional<EmbeddingMatrix> image;
  std::optional<EmbeddingMatrix> faces;

  static Inputs load(const RunConfig& cfg, bool need_faces) {
    Inputs in;
    in.text = load_optional(cfg.text_embeddings, "text_embeddings");
    in.image = load_optional(cfg.image_embeddings, "image_embeddings");
    if (need_faces) {
      in.faces = io::load_embeddings(require(cfg.face_encodings, "face_encodings"));
    } else {
      in.faces = load_optional(cfg.face_encodings, "face_encodings");
    }
    return in;
  }

  [[nodiscard]] DatasetView view(const SampleTable& samples, const ClusterAssignment* assignment = nullptr) const {
    DatasetView v;
    v.samples = &samples;
    v.text_embeddings = text ? &*text : nullptr;
    v.image_embeddings = image ? &*image : nullptr;
    v.face_encodings = faces ? &*faces : nullptr;
    v.assignment = assignment;
    return v;
  }
};

EncoderSettings settings_for(const RunConfig& cfg, const Inputs& in) {
  EncoderSettings s = cfg.encoders;
  if (s.text_mode == TextMode::precomputed) s.text_input_dim = in.text->dim();
  if (in.image) s.image_input_dim = in.image->dim();
  return s;
}

TrainResult fit(const SampleTable& train, const Inputs& in, const RunConfig& cfg, std::ostream& log,
                std::optional<ClusteringOutcome>* clustering_out = nullptr) {
  std::optional<ClusterAssignment> assignment;
  if (cfg.encoders.use_clusters) {
    if (!cfg.assignment.empty()) {
      assignment = io::load_assignment(require(cfg.assignment, "assignment"));
    } else {
      auto outcome = cluster_samples(train, *in.faces, cfg);
      log << "  clustered " << outcome.assignment.size() << " samples into " << outcome.assignment.cluster_count()
          << " clusters (" << algorithm_name(outcome.algorithm) << ")\n";
      assignment = outcome.assignment;
      if (clustering_out) *clustering_out = std::move(outcome);
    }
  }
  return train_model(in.view(train, assignment ? &*assignment : nullptr), settings_for(cfg, in), cfg.train);
}

SampleTable target_table(const RunConfig& cfg) {
  if (!cfg.test_manifest.empty()) return io::load_manifest(require(cfg.test_manifest, "test_manifest"));
  return io::load_manifest(require(cfg.manifest, "manifest"));
}

std::vector<Label> gold_labels(const SampleTable& gold, const std::vector<Prediction>& predictions,
                               std::vector<Label>& predicted) {
  std::vector<Label> out;
  predicted.clear();
  for (const auto& p : predictions) {
    const SampleRecord* r = gold.find(p.id);
    if (!r) throw DataError("prediction for id '" + p.id + "' which is not in the gold manifest");
    if (!r->label) throw DataError("gold manifest has no label for id '" + p.id + "'");
    out.push_back(*r->label);
    predicted.push_back(p.label);
  }
  if (out.empty()) throw DataError("no predictions to evaluate");
  return out;
}

// --- commands ---

void cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  const auto samples = io::load_manifest(require(cfg.manifest, "manifest"));
  const auto faces_raw = io::load_embeddings(require(cfg.face_encodings, "face_encodings"));
  const auto faces = FaceEncodingSet::derive(samples, restrict_to(faces_raw, samples));
  const auto choice = choose_threshold(faces, cfg);
  const auto& sweep = choice.sweep;
  const std::string hash = cfg.hash();

  std::ostringstream curves;
  curves << io::stamp_line({"cdel-sweep-curves/1", hash}, {{"linkage", std::string(linkage_name(sweep.linkage))}});
  curves << "t,num_clusters,sc,chs,dbi\n";
  for (const auto& s : sweep.scores) {
    curves << io::format_real(*s.t) << ',' << s.c << ',' << io::format_real(s.sc) << ','
           << io::format_real(s.chs) << ',' << io::format_real(s.dbi) << '\n';
  }
  std::ostringstream excluded;
  excluded << io::stamp_line({"cdel-sweep-excluded/1", hash});
  excluded << "t,num_clusters,reason\n";
  for (const auto& e : sweep.excluded) {
    excluded << io::format_real(e.t) << ',' << e.c << ',' << csv::escape(e.reason) << '\n';
  }

  const auto& sel = choice.selection;
  Json doc = header("cdel-selection/1", cfg);
  doc["linkage"] = std::string(linkage_name(sweep.linkage));
  doc["t_min"] = sweep.t_min;
  doc["t_max"] = sweep.t_max;
  doc["candidates"] = sweep.scores.size();
  doc["excluded"] = sweep.excluded.size();
  const char* names[] = {"t1", "t2", "t3"};
  for (std::size_t i = 0; i < 3; ++i) doc[names[i]] = sel.picks_t[i];
  Json picks = Json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    Json p = scores_json(sel.picks[i]);
    p["indicator"] = i == 0 ? "sc" : (i == 1 ? "chs" : "dbi");
    p["ci"] = sel.ci[i];
    picks.push_back(std::move(p));
  }
  doc["picks"] = picks;
  doc["ci"] = sel.ci;
  doc["t_op"] = sel.t_op;
  doc["c_op"] = sel.c_op;
  doc["forced"] = choice.forced;

  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(cfg.out("sweep_curves.csv"), curves.str());
  io::write_file_atomic(cfg.out("sweep_excluded.csv"), excluded.str());
  write_json(cfg.out("selection.json"), doc);
  log << "sweep: " << sweep.scores.size() << " candidates scored, " << sweep.excluded.size()
      << " excluded; t1=" << sel.picks_t[0] << " t2=" << sel.picks_t[1] << " t3=" << sel.picks_t[2]
      << " -> t_op=" << sel.t_op << " (c=" << sel.c_op << ")\n";
}

void cmd_cluster(const RunConfig& cfg, std::ostream& log) {
  const auto samples = io::load_manifest(require(cfg.manifest, "manifest"));
  const auto faces = io::load_embeddings(require(cfg.face_encodings, "face_encodings"));
  const auto outcome = cluster_samples(samples, faces, cfg);
  const std::string hash = cfg.hash();

  std::ostringstream assignment;
  io::write_assignment(assignment, outcome.assignment, {"cdel-assignment/1", hash});

  Json report = header("cdel-cluster-report/1", cfg);
  report["algorithm"] = std::string(algorithm_name(outcome.algorithm));
  report["num_clusters"] = outcome.assignment.cluster_count();
  const auto faceless = outcome.assignment.faceless_cluster_id();
  report["faceless_cluster_id"] = faceless ? Json(*faceless) : Json(nullptr);
  report["scores"] = outcome.scores ? scores_json(*outcome.scores) : Json(nullptr);
  if (outcome.threshold) {
    report["t_op"] = outcome.threshold->selection.t_op;
    report["forced"] = outcome.threshold->forced;
  }

  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(cfg.out("assignment.csv"), assignment.str());
  write_json(cfg.out("cluster_report.json"), report);
  if (!outcome.runs.empty()) {
    Json sel = header("cdel-algorithm-selection/1", cfg);
    Json rows = Json::array();
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
      Json row = scores_json(outcome.runs[i].scores);
      row["algorithm"] = std::string(algorithm_name(outcome.runs[i].algorithm));
      row["ci"] = outcome.run_ci[i];
      rows.push_back(std::move(row));
    }
    sel["runs"] = rows;
    sel["selected"] = std::string(algorithm_name(outcome.algorithm));
    write_json(cfg.out("algorithm_selection.json"), sel);
  }
  log << "cluster: " << algorithm_name(outcome.algorithm) << ", " << outcome.assignment.cluster_count()
      << " clusters over " << outcome.assignment.size() << " samples\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const auto samples = io::load_manifest(require(cfg.manifest, "manifest"));
  const auto in = Inputs::load(cfg, cfg.encoders.use_clusters && cfg.assignment.empty());
  if (!samples.all_labeled()) throw DataError("training manifest has unlabeled samples");

  SampleTable train = samples;
  SampleTable dev;
  if (cfg.split_fraction > 0.0) {
    std::tie(train, dev) = stratified_split(samples, cfg.split_fraction, derive_seed(cfg.seed, kStreamDevSplit));
  }
  const auto result = fit(train, in, cfg, log);
  const std::string hash = cfg.hash();

  std::ostringstream train_log;
  train_log << io::stamp_line({"cdel-train-log/1", hash});
  train_log << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    train_log << e + 1 << ',' << io::format_real(result.epoch_loss[e]) << '\n';
  }

  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(cfg.out("model.json"), model_to_json(result.model, hash));
  io::write_file_atomic(cfg.out("train_log.csv"), train_log.str());
  log << "train: " << train.size() << " samples, " << result.epoch_loss.size() << " epochs";
  if (!result.epoch_loss.empty()) log << ", final loss " << result.epoch_loss.back();
  log << '\n';

  if (!dev.empty()) {
    const auto preds = predict(result.model, in.view(dev));
    std::vector<Label> predicted;
    const auto gold = gold_labels(dev, preds, predicted);
    const auto report = MetricsReport::from(confusion_matrix(predicted, gold));
    io::write_file_atomic(cfg.out("dev_metrics.json"), report.to_json(hash));
    log << "  dev split: " << dev.size() << " samples, MacroF1 " << report.macro_f1 << '\n';
  }
}

void cmd_predict(const RunConfig& cfg, std::ostream& log) {
  const fs::path model_path = cfg.model.empty() ? cfg.out("model.json") : cfg.model;
  const auto model = model_from_json(io::read_file(require(model_path, "model")));
  const auto samples = target_table(cfg);
  const auto in = Inputs::load(cfg, false);
  if (model.settings.text_mode == TextMode::precomputed && !in.text) {
    throw ConfigError("model uses precomputed text; config key 'text_embeddings' is required");
  }
  if (model.settings.image_input_dim > 0 && !in.image) {
    throw ConfigError("model uses image features; config key 'image_embeddings' is required");
  }
  const auto preds = predict(model, in.view(samples));
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(cfg.out("predictions.csv"), predictions_csv(preds, cfg.hash()));
  log << "predict: " << preds.size() << " samples\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const fs::path pred_path = cfg.predictions.empty() ? cfg.out("predictions.csv") : cfg.predictions;
  const auto preds = read_predictions(require(pred_path, "predictions"));
  const auto gold_table = target_table(cfg);
  std::vector<Label> predicted;
  const auto gold = gold_labels(gold_table, preds, predicted);
  const auto report = MetricsReport::from(confusion_matrix(predicted, gold));
  const std::string hash = cfg.hash();

  std::ostringstream row;
  row << io::stamp_line({"cdel-metrics/1", hash}) << MetricsReport::csv_header() << '\n' << report.csv_row() << '\n';
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(cfg.out("metrics.json"), report.to_json(hash));
  io::write_file_atomic(cfg.out("metrics.csv"), row.str());
  log << "evaluate: " << report.samples << " samples, MacroF1 " << report.macro_f1 << ", accuracy "
      << report.accuracy << '\n';
}

void cmd_crossval(const RunConfig& cfg, std::ostream& log) {
  const auto samples = io::load_manifest(require(cfg.manifest, "manifest"));
  const auto in = Inputs::load(cfg, cfg.encoders.use_clusters);
  if (!cfg.assignment.empty()) {
    throw ConfigError("crossval clusters each training fold itself; remove the 'assignment' key");
  }
  const auto runner = [&](const SampleTable& train, const SampleTable& held_out, int fold) {
    log << "fold " << fold + 1 << "/" << cfg.folds << ": " << train.size() << " train, " << held_out.size()
        << " held out\n";
    const auto result = fit(train, in, cfg, log);
    std::vector<Label> labels;
    for (const auto& p : predict(result.model, in.view(held_out))) labels.push_back(p.label);
    return labels;
  };
  const auto cv = kfold_crossval(samples, cfg.folds, runner, derive_seed(cfg.seed, kStreamFolds));
  const std::string hash = cfg.hash();

  std::ostringstream table;
  table << io::stamp_line({"cdel-crossval/1", hash}) << "fold," << MetricsReport::csv_header() << '\n';
  for (std::size_t f = 0; f < cv.folds.size(); ++f) table << f + 1 << ',' << cv.folds[f].csv_row() << '\n';

  Json doc = header("cdel-crossval/1", cfg);
  doc["folds"] = cfg.folds;
  doc["fold_macro_f1"] = cv.fold_macro_f1;
  doc["mean_macro_f1"] = cv.mean_macro_f1;
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(cfg.out("crossval.csv"), table.str());
  write_json(cfg.out("crossval.json"), doc);
  log << "crossval: mean MacroF1 " << cv.mean_macro_f1 << " over " << cfg.folds << " folds\n";
}

}  // namespace

std::string_view command_name(Command c) noexcept {
  switch (c) {
    case Command::sweep: return "sweep";
    case Command::cluster: return "cluster";
    case Command::train: return "train";
    case Command::predict: return "predict";
    case Command::evaluate: return "evaluate";
    case Command::crossval: return "crossval";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view text) noexcept {
  for (Command c : {Command::sweep, Command::cluster, Command::train, Command::predict, Command::evaluate,
                    Command::crossval}) {
    if (command_name(c) == text) return c;
  }
  return std::nullopt;
}

RunConfig apply_overrides(const RunConfig& cfg, const Overrides& o) {
  auto entries = cfg.entries;
  if (o.seed) entries["seed"] = std::to_string(*o.seed);
  if (o.force_t) entries["clustering.force_t"] = *o.force_t;
  if (o.out) entries["output_dir"] = fs::absolute(*o.out).lexically_normal().string();
  return RunConfig::from_entries(std::move(entries), cfg.base_dir);
}

ThresholdChoice choose_threshold(const FaceEncodingSet& faces, const RunConfig& cfg) {
  const auto& emb = faces.encodings();
  const auto dm = pairwise_distances(faces, cfg.metric);
  ThresholdChoice out;
  out.sweep = sweep_thresholds(dm, emb, cfg.linkage);
  if (cfg.force_t.size() == 3) {
    std::array<ValidityScores, 3> picks;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto assign = hierarchical_flat_clusters(dm, cfg.linkage, cfg.force_t[i]);
      auto s = try_score(dm, emb, assign);
      if (!s) {
        throw DataError("forced t = " + io::format_real(cfg.force_t[i]) + " gives " +
                        std::to_string(assign.cluster_count()) + " clusters; indices need 2 <= c <= n-1");
      }
      s->t = cfg.force_t[i];
      picks[i] = *s;
    }
    out.selection = select_from_picks(picks);
    out.forced = true;
  } else {
    out.selection = select_optimal_threshold(out.sweep);
    if (cfg.force_t.size() == 1) {
      out.selection.t_op = cfg.force_t[0];
      out.selection.c_op = hierarchical_flat_clusters(dm, cfg.linkage, cfg.force_t[0]).cluster_count();
      out.forced = true;
    }
  }
  return out;
}

ClusteringOutcome cluster_samples(const SampleTable& samples, const EmbeddingMatrix& face_encodings,
                                  const RunConfig& cfg) {
  const auto faces = FaceEncodingSet::derive(samples, restrict_to(face_encodings, samples));
  const auto& emb = faces.encodings();
  if (emb.rows() < 2) {
    throw DataError("clustering needs at least 2 face-bearing samples, got " + std::to_string(emb.rows()));
  }
  const auto dm = pairwise_distances(faces, cfg.metric);
  ClusteringOutcome out;

  auto hierarchical = [&] {
    double t = 0.0;
    if (cfg.force_t.size() == 1) {
      t = cfg.force_t[0];
    } else {
      out.threshold = choose_threshold(faces, cfg);
      t = out.threshold->selection.t_op;
    }
    return hierarchical_flat_clusters(dm, cfg.linkage, t);
  };
  // k-means and spectral take clustering.k, or c_op of the threshold selection.
  auto target_k = [&] {
    if (cfg.k > 0) return cfg.k;
    if (!out.threshold) out.threshold = choose_threshold(faces, cfg);
    return out.threshold->selection.c_op;
  };

  ClusterAssignment face_assign;
  if (cfg.algorithm) {
    out.algorithm = *cfg.algorithm;
    switch (*cfg.algorithm) {
      case Algorithm::hierarchical: face_assign = hierarchical(); break;
      case Algorithm::kmeans: face_assign = kmeans_cluster(emb, target_k(), derive_seed(cfg.seed, kStreamKMeans)); break;
      case Algorithm::spectral:
        face_assign = spectral_cluster(emb, target_k(), cfg.gamma, derive_seed(cfg.seed, kStreamSpectral));
        break;
    }
  } else {
    std::vector<ClusterAssignment> candidates;
    auto consider = [&](Algorithm a, ClusterAssignment assign) {
      if (auto s = try_score(dm, emb, assign)) {
        out.runs.push_back({a, *s});
        candidates.push_back(std::move(assign));
      }
    };
    consider(Algorithm::hierarchical, hierarchical());
    const int k = target_k();
    consider(Algorithm::kmeans, kmeans_cluster(emb, k, derive_seed(cfg.seed, kStreamKMeans)));
    consider(Algorithm::spectral, spectral_cluster(emb, k, cfg.gamma, derive_seed(cfg.seed, kStreamSpectral)));
    if (out.runs.empty()) throw DataError("no clustering algorithm produced a partition with 2 <= c <= n-1");
    std::vector<ValidityScores> scores;
    for (const auto& r : out.runs) scores.push_back(r.scores);
    out.run_ci = comprehensive_indicator(scores);
    out.algorithm = select_algorithm(out.runs);
    for (std::size_t i = 0; i < out.runs.size(); ++i) {
      if (out.runs[i].algorithm == out.algorithm) face_assign = candidates[i];
    }
  }
  out.scores = try_score(dm, emb, face_assign);
  out.assignment = attach_faceless_cluster(face_assign, faces.faceless_ids());
  return out;
}

std::string predictions_csv(const std::vector<Prediction>& predictions, std::string_view config_hash) {
  std::ostringstream out;
  out << io::stamp_line({std::string(kPredictionsFormat), std::string(config_hash)});
  out << "id,predicted_label,p_neg,p_neu,p_pos\n";
  for (const auto& p : predictions) {
    out << csv::escape(p.id) << ',' << label_name(p.label);
    for (double v : p.probabilities) out << ',' << io::format_real(v);
    out << '\n';
  }
  return out.str();
}

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  csv::Reader reader(in);
  reader.read_preamble();
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw DataError(path.string() + ": empty predictions file");
  const std::vector<std::string> expected{"id", "predicted_label", "p_neg", "p_neu", "p_pos"};
  if (fields != expected) {
    throw DataError(path.string() + ": header must be id,predicted_label,p_neg,p_neu,p_pos");
  }
  std::vector<Prediction> out;
  while (reader.next(fields)) {
    const std::string where = path.string() + ":" + std::to_string(reader.line());
    if (fields.size() != expected.size()) {
      throw DataError(where + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    Prediction p;
    p.id = fields[0];
    const auto label = parse_label(fields[1]);
    if (!label) throw DataError(where + ": unknown label '" + fields[1] + "'");
    p.label = *label;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      try {
        std::size_t used = 0;
        p.probabilities[i] = std::stod(fields[2 + i], &used);
        if (used != fields[2 + i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError(where + ": '" + fields[2 + i] + "' is not a number");
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

void run_command(Command command, const RunConfig& cfg, std::ostream& log) {
  switch (command) {
    case Command::sweep: cmd_sweep(cfg, log); break;
    case Command::cluster: cmd_cluster(cfg, log); break;
    case Command::train: cmd_train(cfg, log); break;
    case Command::predict: cmd_predict(cfg, log); break;
    case Command::evaluate: cmd_evaluate(cfg, log); break;
    case Command::crossval: cmd_crossval(cfg, log); break;
  }
}

int execute(Command command, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    run_command(command, cfg, log);
    return 0;
  } catch (const Error& e) {
    err << "cdel " << command_name(command) << ": error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "cdel " << command_name(command) << ": error: " << e.what() << '\n';
    return exit_code(ErrorKind::data);
  }
}

}  // namespace cdel
