#include <CLI11.hpp>

#include <iostream>

#include "tvqm/pipeline.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"3D video quality toolkit: degrade, render, score, validate, report"};
  app.require_subcommand(1);

  std::string config_path, dmos_path, scores_path, out_path;
  bool logistic = false;

  auto* degrade = app.add_subcommand("degrade", "write degraded videos/depths per distortion spec");
  degrade->add_option("-c,--config", config_path, "experiment config file")->required();

  auto* render = app.add_subcommand("render", "synthesize the virtual view (DIBR + hole filling)");
  render->add_option("-c,--config", config_path, "experiment config file")->required();

  auto* score = app.add_subcommand("score", "degrade, re-render and score against the baseline");
  score->add_option("-c,--config", config_path, "experiment config file")->required();

  auto* validate = app.add_subcommand("validate", "VQEG statistics of objective scores vs DMOS");
  validate->add_option("--dmos", dmos_path, "DMOS CSV (sequence_id,dmos[,...])")->required();
  validate->add_option("--scores", scores_path, "scores CSV from the score subcommand")->required();
  validate->add_option("-o,--out", out_path, "output report CSV")->required();
  validate->add_flag("--logistic", logistic, "fit a monotone logistic mapping before the stats");

  auto* report = app.add_subcommand("report", "aggregate a scores CSV per distortion level");
  report->add_option("--scores", scores_path, "scores CSV")->required();
  report->add_option("-o,--out", out_path, "output report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (degrade->parsed()) {
    const auto manifest = tvqm::cmd_degrade(tvqm::parse_config(config_path));
    std::cout << manifest.string() << "\n";
  } else if (render->parsed()) {
    const auto path = tvqm::cmd_render(tvqm::parse_config(config_path));
    std::cout << path.string() << "\n";
  } else if (score->parsed()) {
    const auto path = tvqm::cmd_score(tvqm::parse_config(config_path));
    std::cout << path.string() << "\n";
  } else if (validate->parsed()) {
    tvqm::write_csv(tvqm::cmd_validate(dmos_path, scores_path, logistic), out_path);
    std::cout << out_path << "\n";
  } else if (report->parsed()) {
    tvqm::write_csv(tvqm::cmd_report(scores_path), out_path);
    std::cout << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tvqm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tvqm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const tvqm::DegeneracyError& e) {
    std::cerr << "degeneracy: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
