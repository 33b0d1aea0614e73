#include <cstdint>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "cdel/errors.hpp"
#include "cdel/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cdel: cluster-fused meme emotion classification"};
  app.require_subcommand(1, 1);

  std::string config;
  std::uint64_t seed = 0;
  std::string force_t;
  std::string out;

  const std::pair<const char*, const char*> commands[] = {
      {"sweep", "score hierarchical thresholds and select t_op"},
      {"cluster", "write the cluster assignment (faceless cluster attached)"},
      {"train", "fit the fusion classifier"},
      {"predict", "label a manifest with a trained model"},
      {"evaluate", "confusion matrix, per-class P/R/F1, MacroF1"},
      {"crossval", "stratified k-fold cross-validation"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "run configuration file")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--force-t", force_t, "forced t_op, or t1,t2,t3");
    sub->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cdel::exit_code(cdel::ErrorKind::config);
  }

  auto* sub = app.get_subcommands().front();
  const auto command = *cdel::parse_command(sub->get_name());
  try {
    cdel::Overrides overrides;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--force-t")) overrides.force_t = force_t;
    if (sub->count("--out")) overrides.out = out;
    const auto cfg = cdel::apply_overrides(cdel::RunConfig::load(config), overrides);
    return cdel::execute(command, cfg, std::cout, std::cerr);
  } catch (const cdel::Error& e) {
    std::cerr << "cdel " << sub->get_name() << ": error: " << e.what() << '\n';
    return cdel::exit_code(e.kind());
  }
}
