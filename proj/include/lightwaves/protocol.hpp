#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lightwaves/classifier.hpp"
#include "lightwaves/scattering.hpp"
#include "lightwaves/selection.hpp"

namespace lightwaves {

struct TrainConfig {
  Variant variant = Variant::kL1L2;
  std::size_t final_features = 500;
  std::size_t pool_size = 2500;
  std::size_t max_train_samples = 2048;
  std::uint64_t seed = 0;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::string dataset_path;
  std::uint32_t worker_count = 1;
  bool normalize = false;

  /// Throws UsageError on violated invariants.
  void validate() const;
};

/// What one worker computes: a channel range over the shared sample subset.
struct WorkerAssignment {
  std::uint32_t worker_id = 0;
  std::size_t channel_begin = 0;
  std::size_t channel_end = 0;
  std::vector<std::size_t> sample_indices;
  std::vector<std::uint32_t> labels;
  std::uint32_t classes = 0;
  TrainConfig config;
};

// Wire format: u8 tag | u32 little-endian payload length | payload.
enum class MessageTag : std::uint8_t {
  kHello = 1,
  kAssign = 2,
  kResult = 3,
  kSelected = 4,
  kDone = 5,
  kError = 6,
};

struct HelloMsg {
  std::uint32_t worker_id = 0;
};
struct AssignMsg {
  WorkerAssignment assignment;
};
struct ResultMsg {
  std::vector<ScoredFeature> features;  // descriptors carry global channels
};
struct SelectedMsg {
  std::vector<FeatureDescriptor> descriptors;
};
struct DoneMsg {};
struct ErrorMsg {
  std::string message;
};

using Message = std::variant<HelloMsg, AssignMsg, ResultMsg, SelectedMsg, DoneMsg, ErrorMsg>;

MessageTag tag_of(const Message& m);
std::string_view to_string(MessageTag tag);

std::vector<std::uint8_t> encode_message(const Message& m);
/// Decodes one payload; throws ProtocolError on any malformation.
Message decode_message(MessageTag tag, std::span<const std::uint8_t> payload);

/// Reliable, ordered byte stream between coordinator and worker.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  /// Fills `bytes` completely or throws ProtocolError.
  virtual void read(std::span<std::uint8_t> bytes) = 0;
  virtual void close() = 0;
};

void send_message(ByteStream& stream, const Message& m);
Message receive_message(ByteStream& stream);

/// Two connected in-memory endpoints.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe();

/// Blocking TCP endpoint. A zero timeout means wait forever.
std::unique_ptr<ByteStream> tcp_connect(const std::string& host, std::uint16_t port,
                                        std::chrono::milliseconds timeout = {});

class TcpListener {
 public:
  /// Port 0 binds an ephemeral port; see port().
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Throws ProtocolError("timed out ...") when nobody connects in time.
  std::unique_ptr<ByteStream> accept(std::chrono::milliseconds timeout = {});

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Splits "host:port"; throws UsageError.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace lightwaves
