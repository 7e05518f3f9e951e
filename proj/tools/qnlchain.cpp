// Scenario runner for the coupled-chain laboratory: reproducible
// experiments driven by config files, machine-readable CSV/JSON outputs.

#include "qnl/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"qnlchain - atomistic/quasicontinuum chain experiments"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out = ".";
    bool force = false;
    int threads = 1;
  };

  std::vector<std::pair<qnl::Task, CLI::App*>> subs;
  for (qnl::Task t :
       {qnl::Task::PotentialCheck, qnl::Task::Minimize, qnl::Task::Converge,
        qnl::Task::BoundaryLayers, qnl::Task::FractureMap,
        qnl::Task::LimitCompare}) {
    CLI::App* sub = app.add_subcommand(qnl::taskName(t));
    subs.emplace_back(t, sub);
  }

  Args args;
  for (auto& [t, sub] : subs) {
    sub->add_option("--config", args.config, "scenario config file (key=value or JSON)")
        ->required();
    sub->add_option("--out", args.out, "output directory");
    sub->add_flag("--force", args.force, "overwrite existing outputs");
    sub->add_option("--threads", args.threads, "parallel sweep workers");
  }

  CLI11_PARSE(app, argc, argv);

  qnl::Task task = qnl::Task::PotentialCheck;
  for (auto& [t, sub] : subs)
    if (sub->parsed()) task = t;

  qnl::RunOptions opts;
  opts.outDir = args.out;
  opts.force = args.force;
  opts.threads = std::max(1, args.threads);
  opts.taskOverride = task;

  try {
    return qnl::runScenario(args.config, opts);
  } catch (const qnl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qnl::TaskError& e) {
    std::cerr << "task error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
