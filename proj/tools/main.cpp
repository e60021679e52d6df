// hpjks: simulate panels, run the standardized debiased KS test, run Monte
// Carlo experiments and format result tables.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpjks/cli.hpp"
#include "hpjks/config_io.hpp"

namespace {

using hpjks::Json;

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  return hpjks::read_json_file(path);
}

std::vector<std::string> parse_sector_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty() || text == "all") return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equality-up-to-location-and-scale test for latent TFP distributions"};
  app.require_subcommand(1);

  std::string config_path, input, output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> bootstrap;
  std::optional<int> min_tenure;
  std::optional<std::string> sectors;
  std::optional<unsigned> threads;
  bool svg = false;
  std::string format = "text";

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic panel and its ground truth");
  sim->add_option("--config", config_path, "DGP config (JSON)");
  sim->add_option("--output", output, "Output directory")->required();
  sim->add_option("--seed", seed, "Seed (generated and echoed if omitted)");
  sim->add_option("--threads", threads, "Worker threads");

  auto* test = app.add_subcommand("test", "Run the test on a panel CSV");
  test->add_option("--config", config_path, "Run config (JSON)");
  test->add_option("--input", input, "Panel CSV");
  test->add_option("--output", output, "Output directory");
  test->add_option("--seed", seed, "Bootstrap seed (generated and echoed if omitted)");
  test->add_option("--bootstrap", bootstrap, "Bootstrap draws (default 999)");
  test->add_option("--min-tenure", min_tenure, "Minimum periods per firm (default 15)");
  test->add_option("--sectors", sectors, "Comma-separated sector codes, or 'all'");
  test->add_option("--threads", threads, "Worker threads");
  test->add_flag("--svg", svg, "Also write SVG overlays of the standardized CDFs");

  auto* mc = app.add_subcommand("montecarlo", "Run a size, power or bias experiment");
  mc->add_option("--config", config_path, "Experiment config (JSON)");
  mc->add_option("--output", output, "Output directory")->required();
  mc->add_option("--seed", seed, "Master seed (generated and echoed if omitted)");
  mc->add_option("--bootstrap", bootstrap, "Bootstrap draws per replication (default 199)");
  mc->add_option("--threads", threads, "Worker threads");

  auto* rep = app.add_subcommand("report", "Format a results CSV as a table");
  rep->add_option("--input", input, "results.csv written by 'test'")->required();
  rep->add_option("--output", output, "Write the table here instead of stdout");
  rep->add_option("--format", format, "text or latex")->check(CLI::IsMember({"text", "latex"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const Json doc = load_config(config_path);
      auto cfg = doc.get<hpjks::DgpConfig>();
      if (seed) {
        cfg.seed = *seed;
      } else if (!doc.contains("seed")) {
        cfg.seed = hpjks::fresh_seed();
        std::cerr << "seed: " << cfg.seed << '\n';
      }
      hpjks::cmd_simulate(cfg, output, threads.value_or(1));
    } else if (test->parsed()) {
      auto cfg = load_config(config_path).get<hpjks::TestRunConfig>();
      if (!input.empty()) cfg.input = input;
      if (!output.empty()) cfg.output = output;
      if (seed) cfg.seed = *seed;
      if (bootstrap) cfg.bootstrap = *bootstrap;
      if (min_tenure) cfg.cleaning.min_tenure = *min_tenure;
      if (sectors) cfg.sectors = parse_sector_list(*sectors);
      if (threads) cfg.threads = *threads;
      if (svg) cfg.svg = true;
      if (cfg.input.empty()) throw std::invalid_argument("an input panel is required (--input or config)");
      const bool generated = !cfg.seed;
      const auto run = hpjks::cmd_test(cfg);
      if (generated) std::cerr << "seed: " << run.seed << '\n';
      std::cout << hpjks::cmd_report(cfg.output / "results.csv");
      for (const auto& s : run.sectors) {
        if (!s.ok) std::cerr << "sector " << s.sector << " not tested: " << s.error << '\n';
      }
    } else if (mc->parsed()) {
      const Json doc = load_config(config_path);
      auto cfg = doc.get<hpjks::ExperimentConfig>();
      if (seed) {
        cfg.master_seed = *seed;
      } else if (!doc.contains("master_seed")) {
        cfg.master_seed = hpjks::fresh_seed();
        std::cerr << "seed: " << cfg.master_seed << '\n';
      }
      if (bootstrap) cfg.bootstrap = *bootstrap;
      if (threads) cfg.threads = *threads;
      const auto summary = hpjks::cmd_montecarlo(cfg, output);
      std::cout << hpjks::summary_text(summary);
      std::cerr << "wall clock: " << summary.wall_clock_seconds << " s\n";
    } else if (rep->parsed()) {
      const auto fmt = format == "latex" ? hpjks::ReportFormat::kLatex : hpjks::ReportFormat::kText;
      const std::string table = hpjks::cmd_report(input, fmt);
      if (output.empty()) {
        std::cout << table;
      } else {
        hpjks::write_json_file(output + ".json", Json{{"input", input}, {"format", format}});
        std::ofstream(output) << table;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
