#include "lightwaves/distrib.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "lightwaves/classifier.hpp"
#include "lightwaves/error.hpp"
#include "lightwaves/io.hpp"
#include "lightwaves/kernels.hpp"
#include "lightwaves/parallel.hpp"
#include "lightwaves/selection.hpp"

namespace lightwaves {

std::vector<ChannelRange> partition_channels(std::size_t channels, std::size_t workers) {
  std::vector<ChannelRange> out;
  if (workers == 0) return out;
  const std::size_t base = channels / workers;
  const std::size_t extra = channels % workers;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t size = base + (w < extra ? 1 : 0);
    out.push_back({begin, begin + size});
    begin += size;
  }
  return out;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> subsample(std::size_t n, std::span<const std::uint32_t> labels,
                                   std::size_t classes, std::size_t max_samples, std::uint64_t seed) {
  if (labels.size() != n) throw DataError("subsample: label count mismatch");
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= classes) throw DataError("subsample: label out of range");
    by_class[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].empty()) throw DataError("subsample: class " + std::to_string(c) + " is empty");
  }
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  if (n <= max_samples) return all;
  if (max_samples < classes) throw DataError("subsample: max samples below class count");

  // Largest-remainder apportionment; remainders compared exactly as
  // (max_samples * count) mod n, ties to the lower class index.
  std::vector<std::size_t> quota(classes);
  std::vector<std::pair<std::size_t, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t scaled = max_samples * by_class[c].size();
    quota[c] = scaled / n;
    assigned += quota[c];
    remainders.emplace_back(scaled % n, c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < max_samples; ++i, ++assigned) ++quota[remainders[i].second];
  // Every class keeps at least one row; take from the largest quota.
  for (std::size_t c = 0; c < classes; ++c) {
    if (quota[c] > 0) continue;
    const auto donor = static_cast<std::size_t>(std::max_element(quota.begin(), quota.end()) - quota.begin());
    --quota[donor];
    quota[c] = 1;
  }

  SplitMix64 rng(seed);
  std::vector<std::size_t> out;
  out.reserve(max_samples);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& pool = by_class[c];
    for (std::size_t i = 0; i < quota[c]; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t worker_quota(const TrainConfig& config) {
  return (config.pool_size + config.worker_count - 1) / config.worker_count;
}

namespace {

ResultMsg compute_result(const WorkerAssignment& a, std::size_t threads) {
  ResultMsg result;
  if (a.channel_begin == a.channel_end) return result;
  auto data = load_dataset_slice(a.config.dataset_path, a.sample_indices, a.channel_begin, a.channel_end);
  if (a.config.normalize) z_normalize(data);
  const auto full = transform_full(data, default_kernel_bank(), a.config.variant, threads);
  result.features = local_topk(full.features, full.descriptors, a.labels, a.classes, worker_quota(a.config), threads);
  for (auto& f : result.features) f.descriptor.channel += static_cast<std::uint32_t>(a.channel_begin);
  return result;
}

template <typename T>
T expect(ByteStream& stream, std::string_view what) {
  auto msg = receive_message(stream);
  if (auto* v = std::get_if<T>(&msg)) return std::move(*v);
  throw ProtocolError("expected " + std::string(what) + ", got " + std::string(to_string(tag_of(msg))));
}

}  // namespace

void worker_run(ByteStream& stream, std::uint32_t worker_id, std::size_t threads) {
  send_message(stream, HelloMsg{worker_id});
  auto msg = receive_message(stream);
  auto* assign = std::get_if<AssignMsg>(&msg);
  if (assign == nullptr) throw ProtocolError("malformed ASSIGN: got " + std::string(to_string(tag_of(msg))));
  if (assign->assignment.worker_id != worker_id) throw ProtocolError("ASSIGN addressed to another worker");

  std::exception_ptr failure;
  try {
    send_message(stream, compute_result(assign->assignment, threads));
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    failure = std::current_exception();
    send_message(stream, ErrorMsg{e.what()});
  }
  expect<DoneMsg>(stream, "DONE");
  if (failure) std::rethrow_exception(failure);
}

ModelArtifact coordinator_run(const TrainConfig& config, std::span<const std::unique_ptr<ByteStream>> workers,
                              std::size_t threads, ExchangeLog* log) {
  config.validate();
  if (workers.size() != config.worker_count) {
    throw UsageError("expected " + std::to_string(config.worker_count) + " worker connections, got " +
                     std::to_string(workers.size()));
  }
  ExchangeLog local_log;
  std::mutex log_mutex;
  auto count_send = [&](ByteStream& s, const Message& m) {
    const auto bytes = encode_message(m);
    s.write(bytes);
    std::lock_guard lock(log_mutex);
    ++local_log.messages_sent;
    local_log.bytes_sent += bytes.size();
  };
  auto count_receive = [&](ByteStream& s) {
    auto m = receive_message(s);
    std::lock_guard lock(log_mutex);
    ++local_log.messages_received;
    local_log.bytes_received += encode_message(m).size();
    return m;
  };
  auto abort_all = [&] {
    for (const auto& w : workers) {
      try {
        send_message(*w, DoneMsg{});
      } catch (const std::exception&) {
        // peer already gone
      }
      w->close();
    }
  };

  try {
    auto data = load_dataset(config.dataset_path);
    if (!data.labeled()) throw DataError("training data must be labeled");
    const std::size_t classes = data.class_names.size();
    if (classes < 2) throw DataError("training data needs at least two classes");
    if (config.normalize) z_normalize(data);

    const auto rows = subsample(data.n, data.labels, classes, config.max_train_samples, config.seed);
    std::vector<std::uint32_t> row_labels;
    for (auto r : rows) row_labels.push_back(data.labels[r]);
    const auto ranges = partition_channels(data.channels, config.worker_count);
    const std::size_t quota = worker_quota(config);

    std::vector<std::optional<ResultMsg>> results(config.worker_count);
    std::vector<std::exception_ptr> failures(workers.size());
    std::set<std::uint32_t> ids;
    std::mutex ids_mutex;
    {
      std::vector<std::jthread> handlers;
      for (std::size_t w = 0; w < workers.size(); ++w) {
        handlers.emplace_back([&, w] {
          try {
            auto& stream = *workers[w];
            auto hello_msg = count_receive(stream);
            const auto* hello = std::get_if<HelloMsg>(&hello_msg);
            if (hello == nullptr) throw ProtocolError("expected HELLO");
            const auto id = hello->worker_id;
            {
              std::lock_guard lock(ids_mutex);
              if (id >= config.worker_count) throw ProtocolError("worker id " + std::to_string(id) + " out of range");
              if (!ids.insert(id).second) throw ProtocolError("duplicate worker id " + std::to_string(id));
            }
            WorkerAssignment a;
            a.worker_id = id;
            a.channel_begin = ranges[id].begin;
            a.channel_end = ranges[id].end;
            a.sample_indices = rows;
            a.labels = row_labels;
            a.classes = static_cast<std::uint32_t>(classes);
            a.config = config;
            count_send(stream, AssignMsg{std::move(a)});

            auto reply = count_receive(stream);
            if (auto* err = std::get_if<ErrorMsg>(&reply)) {
              throw DataError("worker " + std::to_string(id) + " failed: " + err->message);
            }
            auto* res = std::get_if<ResultMsg>(&reply);
            if (res == nullptr) throw ProtocolError("expected RESULT from worker " + std::to_string(id));
            if (res->features.size() > quota) throw ProtocolError("RESULT exceeds per-worker quota");
            for (const auto& f : res->features) {
              if (f.descriptor.channel < ranges[id].begin || f.descriptor.channel >= ranges[id].end) {
                throw ProtocolError("RESULT references a channel outside the assignment");
              }
              if (f.values.size() != rows.size()) throw ProtocolError("RESULT value column length mismatch");
            }
            results[id] = std::move(*res);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }

    std::vector<ScoredFeature> pool;
    for (auto& r : results) {
      for (auto& f : r->features) pool.push_back(std::move(f));
    }
    std::sort(pool.begin(), pool.end(), score_order);
    local_log.pool_features = pool.size();
    if (pool.empty()) throw DataError("no informative features: every candidate column is constant");

    const auto selected = mrmr_select(pool, config.final_features, threads);
    pool.clear();

    // Final transformation of the whole training set with the chosen features.
    const KernelBank& bank = default_kernel_bank();
    const SelectivePlan plan(selected);
    const auto f_count = static_cast<Eigen::Index>(selected.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.n), f_count);
    std::vector<std::vector<double>> feature_rows(data.n, std::vector<double>(selected.size()));
    parallel_for(data.n, threads, [&](std::size_t i) { plan.run(data.sample(i), data.channels, bank, feature_rows[i]); });
    for (std::size_t i = 0; i < data.n; ++i) {
      for (Eigen::Index j = 0; j < f_count; ++j) x(static_cast<Eigen::Index>(i), j) = feature_rows[i][static_cast<std::size_t>(j)];
    }
    const auto standardizer = fit_standardizer(x);
    const auto ridge = ridge_fit(standardizer.apply(x), data.labels, classes, config.alpha_grid);

    ModelArtifact model;
    model.variant = config.variant;
    model.descriptors = selected;
    model.feature_means = standardizer.means;
    model.feature_stds = standardizer.stds;
    model.weights = ridge.weights;
    model.alpha = ridge.alpha;
    model.class_names = data.class_names;
    model.channels_used = channels_of(selected);
    model.input_channels = data.channels;
    model.series_length = data.length;
    model.normalize = config.normalize;
    model.metadata = {
        {"dataset", data.name},
        {"seed", std::to_string(config.seed)},
        {"pool_size", std::to_string(config.pool_size)},
        {"final_features", std::to_string(config.final_features)},
        {"max_train_samples", std::to_string(config.max_train_samples)},
        {"selection_rows", std::to_string(rows.size())},
        {"training_rows", std::to_string(data.n)},
    };
    model.validate();

    for (const auto& w : workers) count_send(*w, DoneMsg{});
    if (log) *log = local_log;
    return model;
  } catch (...) {
    abort_all();
    throw;
  }
}

ModelArtifact train_in_process(const TrainConfig& config, std::size_t threads, ExchangeLog* log) {
  config.validate();
  std::vector<std::unique_ptr<ByteStream>> coordinator_ends;
  std::vector<std::jthread> workers;
  for (std::uint32_t w = 0; w < config.worker_count; ++w) {
    auto [a, b] = make_pipe();
    coordinator_ends.push_back(std::move(a));
    workers.emplace_back([stream = std::move(b), w, threads] {
      try {
        worker_run(*stream, w, threads);
      } catch (const std::exception&) {
        // surfaced through the coordinator
      }
    });
  }
  return coordinator_run(config, coordinator_ends, threads, log);
}

ModelArtifact train_with_listener(const TrainConfig& config, TcpListener& listener,
                                  std::chrono::milliseconds accept_timeout, std::size_t threads,
                                  ExchangeLog* log) {
  config.validate();
  std::vector<std::unique_ptr<ByteStream>> streams;
  for (std::uint32_t w = 0; w < config.worker_count; ++w) streams.push_back(listener.accept(accept_timeout));
  return coordinator_run(config, streams, threads, log);
}

}  // namespace lightwaves
