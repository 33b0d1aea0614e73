#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdel/config.hpp"
#include "cdel/evaluation.hpp"
#include "cdel/model.hpp"
#include "cdel/validity.hpp"

namespace cdel {

enum class Command { sweep, cluster, train, predict, evaluate, crossval };

[[nodiscard]] std::string_view command_name(Command c) noexcept;
[[nodiscard]] std::optional<Command> parse_command(std::string_view text) noexcept;

// Command-line flags that take precedence over the config file. They are folded
// into the entries, so the config hash reflects them (except --out).
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> force_t;
  std::optional<std::filesystem::path> out;
};

[[nodiscard]] RunConfig apply_overrides(const RunConfig& cfg, const Overrides& overrides);

// Sweep over the face-bearing samples plus the threshold selection, honouring
// clustering.force_t.
struct ThresholdChoice {
  SweepResult sweep;
  SelectionReport selection;
  bool forced = false;
};

[[nodiscard]] ThresholdChoice choose_threshold(const FaceEncodingSet& faces, const RunConfig& cfg);

struct ClusteringOutcome {
  ClusterAssignment assignment;  // faceless cluster attached when any sample lacks a face
  Algorithm algorithm = Algorithm::hierarchical;
  std::optional<ValidityScores> scores;  // of the face-bearing partition, when defined
  std::optional<ThresholdChoice> threshold;
  std::vector<AlgorithmRun> runs;  // algorithm comparison when clustering.algorithm = auto
  std::vector<double> run_ci;
};

// `face_encodings` may hold rows for ids outside `samples`; they are ignored.
[[nodiscard]] ClusteringOutcome cluster_samples(const SampleTable& samples, const EmbeddingMatrix& face_encodings,
                                                const RunConfig& cfg);

inline constexpr std::string_view kPredictionsFormat = "cdel-predictions/1";
[[nodiscard]] std::string predictions_csv(const std::vector<Prediction>& predictions, std::string_view config_hash);
[[nodiscard]] std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// Runs one command, writing its artifacts under cfg.output_dir. Throws cdel::Error.
void run_command(Command command, const RunConfig& cfg, std::ostream& log);

// run_command with errors turned into a diagnostic line and an exit status:
// 0 success, 2 config, 3 data, 4 numeric.
int execute(Command command, const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace cdel
