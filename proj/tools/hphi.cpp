// Command line front end: hphi space-info | hphi verify <suite>.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "hphi/cli.hpp"
#include "hphi/parallel.hpp"

namespace {

using hphi::cli::ConfigReader;
using hphi::cli::RunReport;

ConfigReader load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hphi::Error(hphi::Errc::InvalidConfig, "cannot open config " + path);
  hphi::cli::json j;
  try {
    j = hphi::cli::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw hphi::Error(hphi::Errc::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigReader(std::move(j));
}

void write_outputs(const RunReport& rep, const std::string& dir) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  for (const auto& t : rep.tables) {
    std::ofstream f(std::filesystem::path(dir) / (t.name + ".csv"), std::ios::binary);
    f << t.str();
    if (!f) throw std::runtime_error("cannot write " + t.name + ".csv");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for Segal-Bargmann spaces with quadratic phases"};
  app.require_subcommand(1);
  std::string config, out, suite;
  int order = 0, threads = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON experiment config")->required();
    sub->add_option("--out", out, "directory for CSV output");
    sub->add_option("--order", order, "quadrature order override")->check(CLI::Range(hphi::kMinOrder, hphi::kMaxOrder));
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* info = app.add_subcommand("space-info", "derived geometry and invariant residuals");
  common(info);
  auto* verify = app.add_subcommand("verify", "run one verification suite");
  verify->add_option("suite", suite, "suite name")
      ->required()
      ->check(CLI::IsMember(hphi::cli::suite_names()));
  common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) hphi::set_num_threads(threads);
    ConfigReader cfg = load(config);
    if (order > 0) cfg.set("/order", order);
    if (out.empty()) out = cfg.get<std::string>("/out", "");
    RunReport rep = info->parsed() ? hphi::cli::cmd_space_info(cfg) : hphi::cli::cmd_verify(cfg, suite);
    write_outputs(rep, out);
    std::cout << rep.text();
    return rep.all_pass() ? 0 : 1;
  } catch (const hphi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hphi::cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
