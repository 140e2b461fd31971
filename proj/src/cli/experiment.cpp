// Copyright 2026 The vfmh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfmh/cli/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "vfmh/baselines/baselines.hpp"
#include "vfmh/core/errors.hpp"
#include "vfmh/core/random.hpp"
#include "vfmh/secagg/group.hpp"
#include "vfmh/transport/endpoint.hpp"

namespace vfmh::cli {
namespace {

using nlohmann::json;

constexpr std::uint64_t kBoundStream = 0x626f756e64ull;

protocol::PartyConfig party_config(const ExperimentConfig& config,
                                   const PartySettings& settings,
                                   std::size_t k, ImageShape image,
                                   std::size_t classes) {
  protocol::PartyConfig pc;
  pc.spec = settings.arch == Architecture::kCustom
                ? parse_network_spec(settings.layers, image,
                                     config.embedding_dim, classes)
                : make_network_spec(settings.arch, image,
                                    config.embedding_dim, classes);
  pc.optimizer = settings.optimizer;
  pc.init_seed = settings.init_seed.value_or(mix_seed(config.seed, k));
  return pc;
}

std::chrono::milliseconds timeout_of(const ExperimentConfig& config) {
  return std::chrono::milliseconds(config.timeout_ms);
}

transport::TcpOptions tcp_options(const ExperimentConfig& config) {
  transport::TcpOptions opts;
  opts.host = config.host;
  opts.port = config.port;
  opts.connect_timeout = timeout_of(config);
  return opts;
}

RunOutcome local_outcome(const ExperimentConfig& config,
                         const PreparedSession& prep) {
  RunOutcome out;
  auto r = baselines::run_local(prep.data[0], prep.session.parties[0],
                                config.epochs, config.batch_size, config.seed);
  out.records = r.tracker.records();
  out.models.push_back(std::move(r.model));
  return out;
}

std::vector<double> per_party(const std::vector<metrics::EpochRecord>& final,
                              double metrics::EpochRecord::*field) {
  std::vector<double> v;
  for (const auto& r : final) v.push_back(r.*field);
  return v;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

LoadedData load_data(const ExperimentConfig& config) {
  LoadedData out;
  switch (config.source) {
    case DataSource::kBlobs: {
      data::BlobParams bp;
      bp.n = config.blob_n;
      bp.classes = config.classes;
      bp.features = config.features;
      bp.spread = config.spread;
      bp.separation = config.separation;
      bp.seed = config.data_seed;
      if (config.test_n >= bp.n) {
        throw ConfigError("data.test_n must be below data.n");
      }
      std::tie(out.train, out.test) =
          data::split_tail(data::synth_blobs(bp), config.test_n);
      break;
    }
    case DataSource::kIdx:
      if (config.train_images.empty() || config.train_labels.empty() ||
          config.test_images.empty() || config.test_labels.empty()) {
        throw ConfigError(
            "data.source = idx needs data.train_images, data.train_labels, "
            "data.test_images and data.test_labels");
      }
      out.train = data::load_idx(config.train_images, config.train_labels,
                                 config.max_train);
      out.test = data::load_idx(config.test_images, config.test_labels,
                                config.max_test);
      break;
    case DataSource::kCsv: {
      if (config.csv.empty()) throw ConfigError("data.source = csv needs data.csv");
      auto all = data::load_csv(config.csv);
      if (config.test_n >= all.size()) {
        throw ConfigError("data.test_n must be below the CSV row count");
      }
      std::tie(out.train, out.test) = data::split_tail(all, config.test_n);
      break;
    }
  }
  return out;
}

PreparedSession prepare_session(const ExperimentConfig& config,
                                const LoadedData& loaded) {
  const std::size_t c = config.num_passive + 1;
  if (config.parties.size() != c) {
    throw ConfigError("expected settings for " + std::to_string(c) +
                      " parties");
  }
  PreparedSession prep;
  prep.data = protocol::partition(loaded.train, loaded.test, c);
  auto& s = prep.session;
  s.num_passive = config.num_passive;
  s.epochs = config.epochs;
  s.batch_size = config.batch_size;
  s.seed = config.seed;
  s.group = secagg::group_by_name(config.group);
  s.scale_bits = config.scale_bits;
  s.masking = config.masking;
  s.test_mode = config.test_mode;
  s.evaluate = config.evaluate;
  s.timeout = timeout_of(config);
  const std::size_t classes = loaded.train.num_classes;
  for (std::size_t k = 0; k < c; ++k) {
    s.parties.push_back(party_config(config, config.parties[k], k,
                                     prep.data[k].image, classes));
  }
  s.validate();
  return prep;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  const LoadedData loaded = load_data(config);
  const PreparedSession prep = prepare_session(config, loaded);
  RunOutcome out;
  const bool tcp = config.transport == TransportKind::kTcp;
  switch (config.method) {
    case Method::kLocal:
      out = local_outcome(config, prep);
      break;
    case Method::kVfedmh: {
      auto r = tcp ? protocol::run_training_tcp(prep.session, prep.data,
                                                tcp_options(config))
                   : protocol::run_training(prep.session, prep.data);
      out.records = r.tracker.records();
      out.models = std::move(r.models);
      out.ledger = std::move(r.ledger);
      break;
    }
    case Method::kAggVfl: {
      if (!tcp) {
        auto r = baselines::run_aggvfl(prep.session, prep.data);
        out.records = r.tracker.records();
        out.models = std::move(r.models);
        out.ledger = std::move(r.ledger);
        out.joint_accuracy = std::move(r.joint_accuracy);
        break;
      }
      out.models.resize(prep.session.num_parties());
      protocol::run_tcp_loopback(
          prep.session.num_parties(), tcp_options(config),
          prep.session.timeout, [&](transport::Endpoint& ep) {
            const auto k = ep.id();
            if (k == transport::kActiveParty) {
              auto r = baselines::run_aggvfl_active(ep, prep.session,
                                                    prep.data[0]);
              out.records = r.tracker.records();
              out.models[0] = std::move(r.model);
              out.ledger = std::move(r.ledger);
              out.joint_accuracy = std::move(r.joint_accuracy);
            } else {
              out.models[k] =
                  baselines::run_aggvfl_passive(ep, prep.session, prep.data[k]);
            }
          });
      break;
    }
  }
  out.method = config.method;
  out.train_rows = loaded.train.size();
  out.test_rows = loaded.test.size();
  return out;
}

RunOutcome run_tcp_party(const ExperimentConfig& config, std::size_t party) {
  if (party > config.num_passive) {
    throw ConfigError("party " + std::to_string(party) +
                      " does not exist with " +
                      std::to_string(config.num_passive) + " passive parties");
  }
  if (config.method == Method::kLocal) {
    throw ConfigError("the local baseline has no per-party processes");
  }
  const LoadedData loaded = load_data(config);
  const PreparedSession prep = prepare_session(config, loaded);
  RunOutcome out;
  out.method = config.method;
  out.train_rows = loaded.train.size();
  out.test_rows = loaded.test.size();
  const bool agg = config.method == Method::kAggVfl;
  if (party == 0) {
    transport::TcpHub hub(config.num_passive, tcp_options(config));
    hub.accept_all(timeout_of(config));
    if (agg) {
      auto r = baselines::run_aggvfl_active(hub, prep.session, prep.data[0]);
      out.records = r.tracker.records();
      out.models.push_back(std::move(r.model));
      out.ledger = std::move(r.ledger);
      out.joint_accuracy = std::move(r.joint_accuracy);
    } else {
      auto r = protocol::run_active(hub, prep.session, prep.data[0]);
      out.records = r.tracker.records();
      out.models.push_back(std::move(r.model));
      out.ledger = std::move(r.ledger);
    }
    return out;
  }
  transport::TcpClient client(static_cast<transport::PartyIndex>(party),
                              tcp_options(config));
  out.models.push_back(
      agg ? baselines::run_aggvfl_passive(client, prep.session, prep.data[party])
          : protocol::run_passive(client, prep.session, prep.data[party]));
  return out;
}

std::string summary_json(const ExperimentConfig& config,
                         const RunOutcome& outcome) {
  metrics::RunTracker tracker;
  for (const auto& r : outcome.records) tracker.append(r);
  const auto final = tracker.final_epoch();

  json j;
  j["method"] = std::string(method_name(outcome.method));
  j["passive_parties"] = config.num_passive;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["seed"] = config.seed;
  j["embedding_dim"] = config.embedding_dim;
  j["train_rows"] = outcome.train_rows;
  j["test_rows"] = outcome.test_rows;
  json parties = json::array();
  for (std::size_t k = 0; k < config.parties.size(); ++k) {
    const auto& p = config.parties[k];
    parties.push_back(
        {{"party", k},
         {"arch", std::string(architecture_name(p.arch))},
         {"optimizer", std::string(optim::kind_name(p.optimizer.kind))},
         {"lr", p.optimizer.learning_rate}});
  }
  j["parties"] = parties;
  j["final_accuracy"] = per_party(final, &metrics::EpochRecord::test_acc);
  j["final_train_loss"] = per_party(final, &metrics::EpochRecord::train_loss);
  if (!outcome.joint_accuracy.empty()) {
    j["joint_accuracy"] = outcome.joint_accuracy.back();
  }
  if (outcome.ledger) {
    const auto& ledger = *outcome.ledger;
    const std::size_t models = config.num_passive + 1;
    const auto report = metrics::ledger_check(
        ledger, config.epochs, models, outcome.train_rows, config.batch_size);
    json l;
    l["messages_per_round"] = ledger.messages_per_round();
    l["rounds_per_epoch"] = report.rounds_per_epoch;
    l["total_rounds"] = ledger.total_rounds();
    l["expected_per_passive"] = report.expected_per_passive;
    l["observed_per_passive"] = report.observed_per_passive;
    l["exact"] = report.exact;
    l["num_models"] = models;
    l["embedding_round_units"] = report.embedding_total;
    l["prediction_round_units"] = report.prediction_total;
    for (const auto phase : {metrics::Phase::kSetup, metrics::Phase::kTrain,
                             metrics::Phase::kEval}) {
      const auto t = ledger.total(phase);
      l[std::string(metrics::phase_name(phase))] = {{"messages", t.messages},
                                                    {"bytes", t.bytes}};
    }
    j["ledger"] = l;
  } else {
    j["ledger"] = nullptr;
  }
  j["bound_violation_rate"] = nullptr;
  return j.dump(2) + "\n";
}

std::filesystem::path output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv("VFMH_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return config.output_dir;
}

void write_outputs(const std::filesystem::path& dir,
                   const ExperimentConfig& config, const RunOutcome& outcome) {
  std::filesystem::create_directories(dir);
  metrics::write_csv(dir / "metrics.csv", outcome.records);
  std::ofstream js(dir / "summary.json", std::ios::binary);
  js << summary_json(config, outcome);
  if (!js) throw DataError("cannot write " + (dir / "summary.json").string());
}

BoundReport run_bound_check(const ExperimentConfig& config) {
  BoundReport report;
  for (std::size_t s = 0; s < config.bound_seeds; ++s) {
    const std::uint64_t seed = mix_seed(mix_seed(config.seed, kBoundStream), s);
    metrics::BoundCheck check;
    if (config.bound_problem == BoundProblem::kQuadratic) {
      metrics::QuadraticProblem problem(config.bound_curvature);
      Rng rng(seed);
      std::vector<double> theta0(problem.dim());
      for (auto& v : theta0) v = rng.normal(0.0, 1.0);
      const double eta =
          config.bound_lr.value_or(config.bound_lr_scale / problem.smoothness());
      check = metrics::check_bound(problem, theta0, eta, config.bound_steps);
    } else {
      ExperimentConfig seeded = config;
      seeded.seed = seed;
      for (auto& p : seeded.parties) p.init_seed.reset();
      LoadedData loaded = load_data(seeded);
      loaded.train = data::take_rows(
          loaded.train, 0, std::min(config.bound_rows, loaded.train.size()));
      const PreparedSession prep = prepare_session(seeded, loaded);
      const auto& spec = prep.session.parties[0].spec;
      if (!spec.decision_is_affine()) {
        throw ConfigError(
            "bound check needs a convex problem: party 0's decision network "
            "must be a single dense layer");
      }
      Tensor phi = protocol::initial_global_embedding(prep.session, prep.data);
      metrics::SoftmaxRegression problem(std::move(phi), loaded.train.labels,
                                         spec.num_classes, config.bound_lambda);
      const NetworkState init =
          init_network(spec, prep.session.parties[0].init_seed);
      const auto range = param_range(spec, Segment::kDecision);
      std::vector<double> theta0;
      for (std::size_t i = range.begin; i < range.end; ++i) {
        const auto& t = init.params[i];
        theta0.insert(theta0.end(), t.data(), t.data() + t.size());
      }
      const double eta =
          config.bound_lr.value_or(config.bound_lr_scale / problem.smoothness());
      check = metrics::check_bound(problem, theta0, eta, config.bound_steps);
    }
    report.informative = report.informative && check.params.informative();
    report.violations += check.violations;
    report.checked += check.checked();
    report.seeds.push_back(std::move(check));
  }
  return report;
}

int cmd_run(const std::filesystem::path& config_path,
            std::optional<std::size_t> party, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = load_config(config_path);
    if (party && config.transport != TransportKind::kTcp) {
      throw ConfigError("--party needs transport.kind = tcp");
    }
    const RunOutcome outcome =
        party ? run_tcp_party(config, *party) : run_experiment(config);
    if (party && *party != 0) {
      out << "party " << *party << " finished\n";
      return 0;
    }
    const auto dir = output_dir(config);
    write_outputs(dir, config, outcome);
    metrics::RunTracker tracker;
    for (const auto& r : outcome.records) tracker.append(r);
    out << method_name(config.method) << ": " << config.epochs << " epochs, "
        << outcome.train_rows << " train rows\n";
    for (const auto& r : tracker.final_epoch()) {
      out << "  party " << r.party << "  test_acc " << std::fixed
          << std::setprecision(4) << r.test_acc << "  train_loss "
          << r.train_loss << "\n";
    }
    if (!outcome.joint_accuracy.empty()) {
      out << "  joint test_acc " << outcome.joint_accuracy.back() << "\n";
    }
    out << "wrote " << (dir / "metrics.csv").string() << " and "
        << (dir / "summary.json").string() << "\n";
    return 0;
  });
}

int cmd_bound_check(const std::filesystem::path& config_path,
                    std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = load_config(config_path);
    const BoundReport report = run_bound_check(config);
    const auto& first = report.seeds.front().params;
    out << "problem " << (config.bound_problem == BoundProblem::kLogistic
                              ? "logistic"
                              : "quadratic")
        << ", " << report.seeds.size() << " seeds, " << config.bound_steps
        << " steps\n";
    out << std::setprecision(6) << "L " << first.smoothness << "  mu "
        << first.strong_convexity << "  G " << first.grad_bound << "  eta "
        << first.learning_rate << "  contraction " << first.contraction()
        << "\n";
    if (!report.informative) {
      err << "warning: contraction factor outside (0, 1); the bound is "
             "non-informative\n";
      out << "non-informative\n";
      return 0;
    }
    out << "fixed point " << first.fixed_point() << "\n";
    out << "violations " << report.violations << " / " << report.checked
        << "  rate " << report.violation_rate() << "\n";
    const bool ok = report.violation_rate() <= config.bound_max_violation;
    out << (ok ? "bound holds\n" : "bound violated\n");
    return ok ? 0 : 1;
  });
}

int cmd_synth(const SynthOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    if (options.out_dir.empty()) throw ConfigError("synth needs an output directory");
    std::filesystem::create_directories(options.out_dir);
    const auto ds = data::synth_blobs(options.blobs);
    const auto path = options.out_dir / "blobs.csv";
    data::write_csv(path, ds);
    out << "wrote " << ds.size() << " rows x " << ds.num_features()
        << " features to " << path.string() << "\n";
    return 0;
  });
}

int cmd_ledger(const std::filesystem::path& summary_path,
               std::optional<std::size_t> num_models, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const json j = read_json(summary_path);
    if (!j.contains("ledger") || j["ledger"].is_null()) {
      throw ConfigError(summary_path.string() +
                        " has no ledger (local baseline run?)");
    }
    try {
      const json& l = j["ledger"];
      metrics::LedgerReport report;
      report.epochs = j.at("epochs").get<std::size_t>();
      report.num_models = num_models.value_or(l.at("num_models").get<std::size_t>());
      report.rounds_per_epoch = l.at("rounds_per_epoch").get<std::size_t>();
      report.expected_per_passive = l.at("expected_per_passive").get<std::uint64_t>();
      report.observed_per_passive =
          l.at("observed_per_passive").get<std::vector<std::uint64_t>>();
      report.exact = l.at("exact").get<bool>();
      report.embedding_total = metrics::embedding_round_units(report.epochs);
      report.prediction_total =
          metrics::prediction_round_units(report.epochs, report.num_models);
      out << "method " << j.at("method").get<std::string>() << ", "
          << l.at("messages_per_round").get<std::size_t>()
          << " messages per round per passive party\n";
      out << metrics::format_report(report);
      return report.exact ? 0 : 1;
    } catch (const json::exception& e) {
      throw ConfigError(summary_path.string() + ": " + e.what());
    }
  });
}

}  // namespace vfmh::cli
