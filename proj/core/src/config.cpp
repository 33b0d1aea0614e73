#include "cdel/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "cdel/errors.hpp"
#include "cdel/io.hpp"

namespace cdel {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys{
      "manifest",           "test_manifest",       "face_encodings",     "text_embeddings",
      "image_embeddings",   "assignment",          "model",              "predictions",
      "output_dir",         "seed",                "clustering.algorithm", "clustering.linkage",
      "clustering.metric",  "clustering.k",        "clustering.gamma",   "clustering.force_t",
      "train.batch_size",   "train.learning_rate", "train.beta1",        "train.beta2",
      "train.epsilon",      "train.dropout",       "train.epochs",       "train.tau",
      "train.activation",   "text.mode",           "text.hash_width",    "text.embed_dim",
      "text.state_dim",     "text.zero_fallback",  "image.mode",         "image.projection_dim",
      "image.zero_fallback", "fusion.use_clusters", "eval.split_fraction", "eval.folds"};
  return keys;
}

class Reader {
 public:
  explicit Reader(const RunConfig::Entries& e) : e_(e) {}

  const std::string* raw(std::string_view key) const {
    auto it = e_.find(std::string(key));
    return it == e_.end() ? nullptr : &it->second;
  }

  double real(std::string_view key, double fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    return parse_real(key, *v);
  }

  static double parse_real(std::string_view key, std::string_view v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError("config key '" + std::string(key) + "': '" + std::string(v) + "' is not a number");
    }
    return out;
  }

  long long integer(std::string_view key, long long fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw ConfigError("config key '" + std::string(key) + "': '" + *v + "' is not an integer");
    }
    return out;
  }

  bool boolean(std::string_view key, bool fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config key '" + std::string(key) + "': '" + *v + "' is not a boolean");
  }

  std::filesystem::path path(std::string_view key, const std::filesystem::path& base) const {
    const std::string* v = raw(key);
    if (!v || v->empty()) return {};
    std::filesystem::path p(*v);
    return p.is_absolute() ? p : base / p;
  }

 private:
  const RunConfig::Entries& e_;
};

}  // namespace

RunConfig::Entries parse_config_entries(std::string_view text) {
  RunConfig::Entries entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    // Comments run from a '#' at line start or after whitespace.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!known_keys().contains(key)) {
      throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    if (!entries.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

RunConfig RunConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  return from_entries(parse_config_entries(text), base_dir);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse(io::read_file(path), base);
}

RunConfig RunConfig::from_entries(Entries entries, const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : entries) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig cfg;
  cfg.entries = std::move(entries);
  cfg.base_dir = base_dir;
  const Reader r(cfg.entries);

  cfg.manifest = r.path("manifest", base_dir);
  cfg.test_manifest = r.path("test_manifest", base_dir);
  cfg.face_encodings = r.path("face_encodings", base_dir);
  cfg.text_embeddings = r.path("text_embeddings", base_dir);
  cfg.image_embeddings = r.path("image_embeddings", base_dir);
  cfg.assignment = r.path("assignment", base_dir);
  cfg.model = r.path("model", base_dir);
  cfg.predictions = r.path("predictions", base_dir);
  if (auto out = r.path("output_dir", base_dir); !out.empty()) {
    cfg.output_dir = out;
  } else {
    cfg.output_dir = base_dir / "out";
  }

  const long long seed = r.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  if (const auto* a = r.raw("clustering.algorithm")) {
    if (*a == "auto") {
      cfg.algorithm.reset();
    } else {
      cfg.algorithm = parse_algorithm(*a);
      if (!cfg.algorithm) {
        throw ConfigError("clustering.algorithm must be hierarchical, kmeans, spectral or auto; got '" + *a + "'");
      }
    }
  }
  if (const auto* l = r.raw("clustering.linkage")) {
    auto linkage = parse_linkage(*l);
    if (!linkage) throw ConfigError("clustering.linkage must be single, complete or average; got '" + *l + "'");
    cfg.linkage = *linkage;
  }
  if (const auto* m = r.raw("clustering.metric"); m && *m != "euclidean") {
    throw ConfigError("clustering.metric supports only 'euclidean'; got '" + *m + "'");
  }
  cfg.k = static_cast<int>(r.integer("clustering.k", 0));
  if (cfg.k < 0) throw ConfigError("clustering.k must be >= 0");
  cfg.gamma = r.real("clustering.gamma", 1.0);
  if (const auto* f = r.raw("clustering.force_t"); f && !f->empty()) {
    std::string item;
    std::istringstream ss(*f);
    while (std::getline(ss, item, ',')) cfg.force_t.push_back(Reader::parse_real("clustering.force_t", trim(item)));
    if (cfg.force_t.size() != 1 && cfg.force_t.size() != 3) {
      throw ConfigError("clustering.force_t takes one t_op or three per-indicator thresholds");
    }
    for (double t : cfg.force_t) {
      if (!(t > 0.0)) throw ConfigError("clustering.force_t values must be > 0");
    }
  }

  TrainConfig& t = cfg.train;
  t.batch_size = static_cast<int>(r.integer("train.batch_size", t.batch_size));
  t.learning_rate = r.real("train.learning_rate", t.learning_rate);
  t.beta1 = r.real("train.beta1", t.beta1);
  t.beta2 = r.real("train.beta2", t.beta2);
  t.epsilon = r.real("train.epsilon", t.epsilon);
  t.dropout_rate = r.real("train.dropout", t.dropout_rate);
  t.epochs = static_cast<int>(r.integer("train.epochs", t.epochs));
  t.tau = r.real("train.tau", t.tau);
  if (const auto* act = r.raw("train.activation")) {
    auto a = parse_activation(*act);
    if (!a) throw ConfigError("train.activation must be softmax or sigmoid; got '" + *act + "'");
    t.activation = *a;
  }
  t.seed = cfg.seed;
  t.validate();

  EncoderSettings& e = cfg.encoders;
  if (const auto* m = r.raw("text.mode")) {
    if (*m == "toy") {
      e.text_mode = TextMode::toy;
    } else if (*m == "precomputed") {
      e.text_mode = TextMode::precomputed;
    } else {
      throw ConfigError("text.mode must be toy or precomputed; got '" + *m + "'");
    }
  } else if (!cfg.text_embeddings.empty()) {
    e.text_mode = TextMode::precomputed;
  }
  e.toy_text.hash_width = static_cast<int>(r.integer("text.hash_width", e.toy_text.hash_width));
  e.toy_text.embed_dim = static_cast<int>(r.integer("text.embed_dim", e.toy_text.embed_dim));
  e.toy_text.state_dim = static_cast<int>(r.integer("text.state_dim", e.toy_text.state_dim));
  if (e.toy_text.hash_width < 1 || e.toy_text.embed_dim < 1 || e.toy_text.state_dim < 1) {
    throw ConfigError("text encoder dimensions must be >= 1");
  }
  e.text_zero_fallback = r.boolean("text.zero_fallback", e.text_zero_fallback);
  if (const auto* m = r.raw("image.mode")) {
    if (*m == "passthrough") {
      e.image_mode = ImageMode::passthrough;
    } else if (*m == "projection") {
      e.image_mode = ImageMode::projection;
    } else {
      throw ConfigError("image.mode must be passthrough or projection; got '" + *m + "'");
    }
  }
  e.image_projection_dim = r.integer("image.projection_dim", e.image_projection_dim);
  if (e.image_projection_dim < 1) throw ConfigError("image.projection_dim must be >= 1");
  e.image_zero_fallback = r.boolean("image.zero_fallback", e.image_zero_fallback);
  e.use_clusters = r.boolean("fusion.use_clusters", e.use_clusters);
  if (e.text_mode == TextMode::precomputed && cfg.text_embeddings.empty()) {
    throw ConfigError("text.mode = precomputed needs text_embeddings");
  }

  cfg.split_fraction = r.real("eval.split_fraction", 0.0);
  if (!(cfg.split_fraction >= 0.0 && cfg.split_fraction < 1.0)) {
    throw ConfigError("eval.split_fraction must lie in [0, 1)");
  }
  cfg.folds = static_cast<int>(r.integer("eval.folds", 5));
  if (cfg.folds < 2) throw ConfigError("eval.folds must be >= 2");
  return cfg;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : entries) {
    if (key == "output_dir") continue;
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cdel
