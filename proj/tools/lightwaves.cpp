// lightwaves: train, apply and inspect wavelet-scattering time series classifiers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lightwaves/distrib.hpp"
#include "lightwaves/error.hpp"
#include "lightwaves/inference.hpp"
#include "lightwaves/io.hpp"
#include "lightwaves/macs.hpp"
#include "lightwaves/parallel.hpp"
#include "lightwaves/synthetic.hpp"

namespace lw = lightwaves;
using Clock = std::chrono::steady_clock;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string join(const std::vector<std::uint32_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

struct TrainOptions {
  std::string data;
  std::string variant = "l1l2";
  std::size_t features = 500;
  std::size_t pool = 2500;
  std::size_t max_samples = 2048;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  std::string out;
  bool normalize = false;
  std::size_t threads = 0;
  std::string listen;
  std::vector<std::string> connect_workers;
  double timeout = 60.0;
};

int cmd_train(const TrainOptions& o) {
  lw::TrainConfig config;
  const auto variant = lw::parse_variant(o.variant);
  if (!variant) throw lw::UsageError("unknown variant '" + o.variant + "' (expected l1, l2 or l1l2)");
  config.variant = *variant;
  config.final_features = o.features;
  config.pool_size = o.pool;
  config.max_train_samples = o.max_samples;
  config.seed = o.seed;
  config.dataset_path = o.data;
  config.normalize = o.normalize;
  config.worker_count = o.workers;
  if (!o.connect_workers.empty()) config.worker_count = static_cast<std::uint32_t>(o.connect_workers.size());
  config.validate();

  const std::size_t threads = lw::resolve_threads(o.threads);
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout * 1000));
  const auto start = Clock::now();
  lw::ModelArtifact model;
  if (!o.listen.empty()) {
    const auto [host, port] = lw::parse_endpoint(o.listen);
    lw::TcpListener listener(host, port);
    std::cerr << "waiting for " << config.worker_count << " worker(s) on port " << listener.port() << "\n";
    model = lw::train_with_listener(config, listener, timeout, threads);
  } else if (!o.connect_workers.empty()) {
    std::vector<std::unique_ptr<lw::ByteStream>> streams;
    for (const auto& endpoint : o.connect_workers) {
      const auto [host, port] = lw::parse_endpoint(endpoint);
      streams.push_back(lw::tcp_connect(host, port, timeout));
    }
    model = lw::coordinator_run(config, streams, threads);
  } else {
    model = lw::train_in_process(config, threads);
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  lw::save_model(model, o.out);

  std::cout << "dataset,n,C,L,variant,features_selected,channels_used,train_seconds\n"
            << model.metadata.at("dataset") << "," << model.metadata.at("training_rows") << ","
            << model.input_channels << "," << model.series_length << "," << lw::to_string(model.variant) << ","
            << model.descriptors.size() << "," << model.channels_used.size() << "," << fmt(seconds) << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, bool score, std::size_t threads) {
  lw::Predictor predictor(lw::load_model(model_path));
  const auto data = lw::load_dataset(data_path);
  if (score && !data.labeled()) throw lw::DataError("labels required");
  const auto predicted = predictor.predict(data, lw::resolve_threads(threads));
  for (auto p : predicted) std::cout << predictor.model().class_names[p] << "\n";
  if (score) {
    if (data.class_names != predictor.model().class_names) {
      throw lw::DataError("class names of data do not match the model");
    }
    std::cout << "accuracy," << fmt(lw::accuracy(predicted, data)) << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path, std::size_t threads) {
  lw::Predictor predictor(lw::load_model(model_path));
  const auto data = lw::load_dataset(data_path);
  if (!data.labeled()) throw lw::DataError("labels required");
  if (data.class_names != predictor.model().class_names) throw lw::DataError("class names of data do not match the model");
  const auto predicted = predictor.predict(data, lw::resolve_threads(threads));
  std::cout << "dataset,n,accuracy\n" << data.name << "," << data.n << "," << fmt(lw::accuracy(predicted, data)) << "\n";
  return 0;
}

int cmd_inspect(const std::string& model_path) {
  const auto model = lw::load_model(model_path);
  std::map<std::uint32_t, std::size_t> per_channel;
  std::map<std::uint32_t, std::size_t> per_level;
  for (const auto& d : model.descriptors) {
    ++per_channel[d.channel];
    ++per_level[d.level];
  }
  std::cout << model.channels_used.size() << " of " << model.input_channels << " channels used\n"
            << "channels: " << join(model.channels_used) << "\n"
            << "features: " << model.descriptors.size() << " (level1 " << per_level[1] << ", level2 "
            << per_level[2] << ")\n"
            << "channel,features\n";
  for (const auto& [c, count] : per_channel) std::cout << c << "," << count << "\n";
  return 0;
}

void print_mac_header() {
  std::cout << "lightwaves_macs,baseline_macs,ratio,baseline_kernel_count,baseline_kernel_length,"
               "baseline_channels_per_kernel,series_length,paths\n";
}

void print_mac_row(const lw::MacReport& r) {
  const auto& a = r.assumptions;
  std::cout << r.lightwaves_macs << "," << r.baseline_macs << "," << fmt(r.ratio) << ","
            << a.at("baseline_kernel_count") << "," << a.at("baseline_kernel_length") << ","
            << a.at("baseline_channels_per_kernel") << "," << a.at("series_length") << "," << a.at("paths") << "\n";
}

struct BenchStats {
  double min_us = 0, mean_us = 0, p95_us = 0;
};

BenchStats stats_of(std::vector<double> xs) {
  BenchStats s;
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  s.min_us = xs.front();
  double total = 0;
  for (double x : xs) total += x;
  s.mean_us = total / static_cast<double>(xs.size());
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(xs.size())));
  s.p95_us = xs[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

int cmd_bench(const std::string& model_path, const std::string& data_path, std::size_t repeats,
              std::size_t warmup, std::size_t threads_opt, std::optional<double> baseline_channels,
              std::uint64_t baseline_kernels, double baseline_length, bool compare_full) {
  lw::Predictor predictor(lw::load_model(model_path));
  const auto data = lw::load_dataset(data_path);
  predictor.check_compatible(data);
  const std::size_t threads = lw::resolve_threads(threads_opt);
  std::size_t sink = 0;

  auto time_pass = [&] {
    std::vector<double> lat;
    for (std::size_t i = 0; i < data.n; ++i) {
      const auto t0 = Clock::now();
      sink += predictor.predict(data.sample(i), threads);
      lat.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
    }
    return lat;
  };
  for (std::size_t w = 0; w < warmup; ++w) time_pass();

  std::string mac_cols = ",,";
  {
    const auto& m = predictor.model();
    std::ostringstream os;
    if (baseline_channels) {
      const auto r = lw::estimate_macs(m.descriptors, data.length,
                                       {baseline_kernels, baseline_length, *baseline_channels});
      os << r.lightwaves_macs << "," << r.baseline_macs << "," << fmt(r.ratio);
    } else {
      const auto r = lw::estimate_macs(m.descriptors, data.length, {baseline_kernels, baseline_length, 1.0});
      os << r.lightwaves_macs << ",,";
    }
    mac_cols = os.str();
  }

  std::cout << "kind,repeat,samples,min_us,mean_us,p95_us,lightwaves_macs,baseline_macs,mac_ratio\n";
  std::vector<double> all;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto lat = time_pass();
    const auto s = stats_of(lat);
    all.insert(all.end(), lat.begin(), lat.end());
    std::cout << "repeat," << r << "," << data.n << "," << fmt(s.min_us) << "," << fmt(s.mean_us) << ","
              << fmt(s.p95_us) << ",,,\n";
  }
  const auto s = stats_of(all);
  std::cout << "summary,," << all.size() << "," << fmt(s.min_us) << "," << fmt(s.mean_us) << "," << fmt(s.p95_us)
            << "," << mac_cols << "\n";
  if (compare_full) {
    std::vector<double> lat;
    std::vector<std::size_t> first{0};
    for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
      const auto one = data.slice(first, 0, data.channels);
      const auto t0 = Clock::now();
      const auto full = lw::transform_full(one, lw::default_kernel_bank(), predictor.model().variant, threads);
      lat.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
      sink += full.features.cols();
    }
    const auto f = stats_of(lat);
    std::cout << "full_transform,," << lat.size() << "," << fmt(f.min_us) << "," << fmt(f.mean_us) << ","
              << fmt(f.p95_us) << ",,,\n";
  }
  if (sink == static_cast<std::size_t>(-1)) std::cerr << "\n";
  return 0;
}

int cmd_worker(const std::string& connect, const std::string& listen, std::uint32_t id, double timeout_s,
               std::size_t threads) {
  if (connect.empty() == listen.empty()) throw lw::UsageError("worker needs exactly one of --connect or --listen");
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
  std::unique_ptr<lw::ByteStream> stream;
  if (!connect.empty()) {
    const auto [host, port] = lw::parse_endpoint(connect);
    stream = lw::tcp_connect(host, port, timeout);
  } else {
    const auto [host, port] = lw::parse_endpoint(listen);
    lw::TcpListener listener(host, port);
    std::cerr << "worker " << id << " listening on port " << listener.port() << "\n";
    stream = listener.accept(timeout);
  }
  lw::worker_run(*stream, id, lw::resolve_threads(threads));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-scattering multivariate time series classification"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write it as JSON");
  train_cmd->add_option("--data", train.data, "Training dataset (.ts or LWDS)")->required();
  train_cmd->add_option("--variant", train.variant, "l1, l2 or l1l2")->capture_default_str();
  train_cmd->add_option("--features", train.features, "Final number of selected features")->capture_default_str();
  train_cmd->add_option("--pool", train.pool, "Candidate pool size gathered from workers")->capture_default_str();
  train_cmd->add_option("--max-samples", train.max_samples, "Training rows used for selection")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Subsampling seed")->capture_default_str();
  train_cmd->add_option("--workers", train.workers, "Number of workers")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model output path")->required();
  train_cmd->add_flag("--normalize", train.normalize, "z-normalize every series before the transform");
  train_cmd->add_option("--threads", train.threads, "Threads (0: LIGHTWAVES_THREADS or all cores)");
  train_cmd->add_option("--listen", train.listen, "host:port to accept remote workers on");
  train_cmd->add_option("--connect-workers", train.connect_workers, "host:port of listening workers")
      ->delimiter(',');
  train_cmd->add_option("--timeout", train.timeout, "Seconds to wait for worker connections")->capture_default_str();

  std::string model_path, data_path;
  bool score = false;
  std::size_t threads = 0;
  auto* predict_cmd = app.add_subcommand("predict", "Print one predicted class per sample");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--data", data_path)->required();
  predict_cmd->add_flag("--score", score, "Also print accuracy (needs labels)");
  predict_cmd->add_option("--threads", threads);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Accuracy of a model on labeled data");
  evaluate_cmd->add_option("--model", model_path)->required();
  evaluate_cmd->add_option("--data", data_path)->required();
  evaluate_cmd->add_option("--threads", threads);

  auto* inspect_cmd = app.add_subcommand("inspect", "Report the input channels a model uses");
  inspect_cmd->add_option("--model", model_path)->required();

  std::optional<std::size_t> length;
  std::optional<double> baseline_channels;
  std::uint64_t baseline_kernels = 10000;
  double baseline_length = 9.0;
  auto* macs_cmd = app.add_subcommand("macs", "Estimate multiply-accumulates per inference sample");
  macs_cmd->add_option("--model", model_path)->required();
  macs_cmd->add_option("--length", length, "Series length (default: the model's training length)");
  macs_cmd->add_option("--baseline-kernels", baseline_kernels)->capture_default_str();
  macs_cmd->add_option("--baseline-kernel-length", baseline_length)->capture_default_str();
  macs_cmd->add_option("--baseline-channels", baseline_channels, "Mean input channels per baseline kernel")
      ->required();

  std::size_t repeats = 10;
  std::size_t warmup = 1;
  bool compare_full = false;
  auto* bench_cmd = app.add_subcommand("bench", "Time per-sample transform and prediction");
  bench_cmd->add_option("--model", model_path)->required();
  bench_cmd->add_option("--data", data_path)->required();
  bench_cmd->add_option("--repeats", repeats)->capture_default_str();
  bench_cmd->add_option("--warmup", warmup, "Untimed passes before measuring")->capture_default_str();
  bench_cmd->add_option("--threads", threads);
  bench_cmd->add_option("--baseline-channels", baseline_channels, "Mean input channels per baseline kernel");
  bench_cmd->add_option("--baseline-kernels", baseline_kernels)->capture_default_str();
  bench_cmd->add_option("--baseline-kernel-length", baseline_length)->capture_default_str();
  bench_cmd->add_flag("--compare-full", compare_full, "Also time the full transform of one sample");

  std::string connect, listen;
  std::uint32_t worker_id = 0;
  double worker_timeout = 30.0;
  auto* worker_cmd = app.add_subcommand("worker", "Serve one training run as a worker");
  worker_cmd->add_option("--connect", connect, "Coordinator host:port");
  worker_cmd->add_option("--listen", listen, "host:port to wait for the coordinator on");
  worker_cmd->add_option("--id", worker_id, "Worker id in [0, workers)")->capture_default_str();
  worker_cmd->add_option("--timeout", worker_timeout, "Seconds to wait for the coordinator")->capture_default_str();
  worker_cmd->add_option("--threads", threads);

  std::string in_path, out_path;
  auto* convert_cmd = app.add_subcommand("convert", "Convert a .ts file to the LWDS binary format");
  convert_cmd->add_option("--in", in_path)->required();
  convert_cmd->add_option("--out", out_path)->required();

  lw::SyntheticSpec synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic sinusoid dataset (LWDS)");
  synth_cmd->add_option("--out", out_path)->required();
  synth_cmd->add_option("--n", synth.n)->capture_default_str();
  synth_cmd->add_option("--channels", synth.channels)->capture_default_str();
  synth_cmd->add_option("--length", synth.length)->capture_default_str();
  synth_cmd->add_option("--informative", synth.informative)->capture_default_str();
  synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*predict_cmd) return cmd_predict(model_path, data_path, score, threads);
    if (*evaluate_cmd) return cmd_evaluate(model_path, data_path, threads);
    if (*inspect_cmd) return cmd_inspect(model_path);
    if (*macs_cmd) {
      const auto model = lw::load_model(model_path);
      const auto r = lw::estimate_macs(model.descriptors, length.value_or(model.series_length),
                                       {baseline_kernels, baseline_length, *baseline_channels});
      print_mac_header();
      print_mac_row(r);
      return 0;
    }
    if (*bench_cmd) {
      return cmd_bench(model_path, data_path, repeats, warmup, threads, baseline_channels, baseline_kernels,
                       baseline_length, compare_full);
    }
    if (*worker_cmd) return cmd_worker(connect, listen, worker_id, worker_timeout, threads);
    if (*convert_cmd) {
      lw::write_binary_dataset_file(lw::load_dataset(in_path), out_path);
      return 0;
    }
    if (*synth_cmd) {
      lw::write_binary_dataset_file(lw::make_sinusoid_dataset(synth), out_path);
      return 0;
    }
  } catch (const lw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
