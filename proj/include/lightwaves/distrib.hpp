#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "lightwaves/model.hpp"
#include "lightwaves/protocol.hpp"

namespace lightwaves {

struct ChannelRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const ChannelRange&) const = default;
};

/// Contiguous balanced split of [0, channels); earlier workers get the
/// larger ranges and surplus workers get empty ones.
std::vector<ChannelRange> partition_channels(std::size_t channels, std::size_t workers);

/// splitmix64 stream, the only randomness in training.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform-ish integer in [0, bound) by modulo reduction.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// Stratified subsample of training rows. Returns 0..n-1 when
/// n <= max_samples; otherwise per-class quotas proportional to class
/// frequency (largest remainder, each class >= 1), drawn by a seeded
/// partial Fisher-Yates per class. Output is ascending.
std::vector<std::size_t> subsample(std::size_t n, std::span<const std::uint32_t> labels,
                                   std::size_t classes, std::size_t max_samples, std::uint64_t seed);

/// Features each worker reports: ceil(pool_size / worker_count).
std::size_t worker_quota(const TrainConfig& config);

/// Worker side of one training run over `stream`: HELLO, await ASSIGN,
/// transform its channel slice, send RESULT (or ERROR), await DONE.
void worker_run(ByteStream& stream, std::uint32_t worker_id, std::size_t threads = 1);

/// Observed traffic of one coordinator run.
struct ExchangeLog {
  std::size_t messages_sent = 0;
  std::size_t messages_received = 0;
  std::size_t bytes_sent = 0;
  std::size_t bytes_received = 0;
  std::size_t pool_features = 0;
};

/// Coordinator side over already-open worker connections
/// (one per worker, in any order).
ModelArtifact coordinator_run(const TrainConfig& config, std::span<const std::unique_ptr<ByteStream>> workers,
                              std::size_t threads = 1, ExchangeLog* log = nullptr);

/// Coordinator plus config.worker_count in-process workers on threads.
ModelArtifact train_in_process(const TrainConfig& config, std::size_t threads = 1, ExchangeLog* log = nullptr);

/// Coordinator accepting config.worker_count TCP workers on `listener`.
ModelArtifact train_with_listener(const TrainConfig& config, TcpListener& listener,
                                  std::chrono::milliseconds accept_timeout, std::size_t threads = 1,
                                  ExchangeLog* log = nullptr);

}  // namespace lightwaves
