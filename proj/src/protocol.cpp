#include "lightwaves/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <limits>
#include <mutex>
#include <thread>

#include "lightwaves/bytes.hpp"
#include "lightwaves/error.hpp"

namespace lightwaves {

void TrainConfig::validate() const {
  if (final_features < 1) throw UsageError("final feature count must be >= 1");
  if (pool_size < 1) throw UsageError("pool size must be >= 1");
  if (final_features > pool_size) throw UsageError("final feature count exceeds pool size");
  if (worker_count < 1) throw UsageError("worker count must be >= 1");
  if (max_train_samples < 2) throw UsageError("max train samples must be >= 2");
  if (alpha_grid.empty()) throw UsageError("alpha grid is empty");
  for (double a : alpha_grid) {
    if (!(a > 0.0)) throw UsageError("alphas must be positive");
  }
}

MessageTag tag_of(const Message& m) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HelloMsg>) return MessageTag::kHello;
        if constexpr (std::is_same_v<T, AssignMsg>) return MessageTag::kAssign;
        if constexpr (std::is_same_v<T, ResultMsg>) return MessageTag::kResult;
        if constexpr (std::is_same_v<T, SelectedMsg>) return MessageTag::kSelected;
        if constexpr (std::is_same_v<T, DoneMsg>) return MessageTag::kDone;
        if constexpr (std::is_same_v<T, ErrorMsg>) return MessageTag::kError;
      },
      m);
}

std::string_view to_string(MessageTag tag) {
  switch (tag) {
    case MessageTag::kHello: return "HELLO";
    case MessageTag::kAssign: return "ASSIGN";
    case MessageTag::kResult: return "RESULT";
    case MessageTag::kSelected: return "SELECTED";
    case MessageTag::kDone: return "DONE";
    case MessageTag::kError: return "ERROR";
  }
  return "UNKNOWN";
}

namespace {

void put_descriptor(ByteWriter& w, const FeatureDescriptor& d) {
  w.u32(d.channel);
  w.u8(d.kernel);
  w.u8(d.dilation_exp);
  w.u8(d.level);
  w.u8(static_cast<std::uint8_t>(d.stat));
}

FeatureDescriptor get_descriptor(ByteReader<ProtocolError>& r) {
  FeatureDescriptor d;
  d.channel = r.u32();
  d.kernel = r.u8();
  d.dilation_exp = r.u8();
  d.level = r.u8();
  const auto stat = r.u8();
  if (d.kernel >= kKernelCount || d.dilation_exp >= kDilationCount || (d.level != 1 && d.level != 2) ||
      stat > static_cast<std::uint8_t>(Stat::kLs)) {
    throw ProtocolError("invalid feature descriptor");
  }
  d.stat = static_cast<Stat>(stat);
  return d;
}

// Guards allocation sizes derived from untrusted counts.
void check_count(ByteReader<ProtocolError>& r, std::uint64_t count, std::size_t min_bytes_each) {
  if (min_bytes_each > 0 && count > r.remaining() / min_bytes_each) throw ProtocolError("truncated payload");
}

void put_payload(ByteWriter& w, const Message& m) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HelloMsg>) {
          w.u32(v.worker_id);
        } else if constexpr (std::is_same_v<T, AssignMsg>) {
          const auto& a = v.assignment;
          if (a.labels.size() != a.sample_indices.size()) throw ProtocolError("ASSIGN labels/indices mismatch");
          w.u32(a.worker_id);
          w.u64(a.channel_begin);
          w.u64(a.channel_end);
          w.u32(a.classes);
          w.u64(a.sample_indices.size());
          for (auto i : a.sample_indices) w.u64(i);
          for (auto l : a.labels) w.u32(l);
          const auto& c = a.config;
          w.u8(static_cast<std::uint8_t>(c.variant));
          w.u64(c.final_features);
          w.u64(c.pool_size);
          w.u64(c.max_train_samples);
          w.u64(c.seed);
          w.u32(c.worker_count);
          w.u8(c.normalize ? 1 : 0);
          w.u32(static_cast<std::uint32_t>(c.alpha_grid.size()));
          for (double x : c.alpha_grid) w.f64(x);
          w.str(c.dataset_path);
        } else if constexpr (std::is_same_v<T, ResultMsg>) {
          const std::uint64_t m = v.features.empty() ? 0 : v.features.front().values.size();
          w.u32(static_cast<std::uint32_t>(v.features.size()));
          w.u64(m);
          for (const auto& f : v.features) {
            if (f.values.size() != m) throw ProtocolError("RESULT value columns differ in length");
            put_descriptor(w, f.descriptor);
            w.f64(f.f_score);
            for (double x : f.values) w.f64(x);
          }
        } else if constexpr (std::is_same_v<T, SelectedMsg>) {
          w.u32(static_cast<std::uint32_t>(v.descriptors.size()));
          for (const auto& d : v.descriptors) put_descriptor(w, d);
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          w.str(v.message);
        }
      },
      m);
}

}  // namespace

std::vector<std::uint8_t> encode_message(const Message& m) {
  ByteWriter payload;
  put_payload(payload, m);
  const auto& body = payload.data();
  if (body.size() > std::numeric_limits<std::uint32_t>::max()) throw ProtocolError("message too large");
  ByteWriter out;
  out.u8(static_cast<std::uint8_t>(tag_of(m)));
  out.u32(static_cast<std::uint32_t>(body.size()));
  out.bytes(body);
  return std::move(out).take();
}

Message decode_message(MessageTag tag, std::span<const std::uint8_t> payload) {
  ByteReader<ProtocolError> r(payload);
  Message out;
  switch (tag) {
    case MessageTag::kHello:
      out = HelloMsg{r.u32()};
      break;
    case MessageTag::kAssign: {
      WorkerAssignment a;
      a.worker_id = r.u32();
      a.channel_begin = r.u64();
      a.channel_end = r.u64();
      if (a.channel_begin > a.channel_end) throw ProtocolError("malformed ASSIGN: inverted channel range");
      a.classes = r.u32();
      const auto count = r.u64();
      check_count(r, count, 12);
      a.sample_indices.resize(count);
      for (auto& i : a.sample_indices) i = r.u64();
      a.labels.resize(count);
      for (auto& l : a.labels) {
        l = r.u32();
        if (l >= a.classes) throw ProtocolError("malformed ASSIGN: label out of range");
      }
      auto& c = a.config;
      const auto variant = r.u8();
      if (variant > static_cast<std::uint8_t>(Variant::kL1L2)) throw ProtocolError("malformed ASSIGN: variant");
      c.variant = static_cast<Variant>(variant);
      c.final_features = r.u64();
      c.pool_size = r.u64();
      c.max_train_samples = r.u64();
      c.seed = r.u64();
      c.worker_count = r.u32();
      c.normalize = r.u8() != 0;
      const auto alphas = r.u32();
      check_count(r, alphas, 8);
      c.alpha_grid.resize(alphas);
      for (auto& x : c.alpha_grid) x = r.f64();
      c.dataset_path = r.str();
      if (c.worker_count == 0 || c.pool_size == 0) throw ProtocolError("malformed ASSIGN: config");
      out = AssignMsg{std::move(a)};
      break;
    }
    case MessageTag::kResult: {
      ResultMsg res;
      const auto count = r.u32();
      const auto m = r.u64();
      if (m > r.remaining() / 8) throw ProtocolError("truncated payload");
      check_count(r, count, 16 + 8 * m);
      res.features.resize(count);
      for (auto& f : res.features) {
        f.descriptor = get_descriptor(r);
        f.f_score = r.f64();
        f.values.resize(m);
        for (auto& x : f.values) x = r.f64();
      }
      out = std::move(res);
      break;
    }
    case MessageTag::kSelected: {
      SelectedMsg sel;
      const auto count = r.u32();
      check_count(r, count, 8);
      for (std::uint32_t i = 0; i < count; ++i) sel.descriptors.push_back(get_descriptor(r));
      out = std::move(sel);
      break;
    }
    case MessageTag::kDone:
      out = DoneMsg{};
      break;
    case MessageTag::kError:
      out = ErrorMsg{r.str()};
      break;
    default:
      throw ProtocolError("unknown message tag " + std::to_string(static_cast<int>(tag)));
  }
  if (r.remaining() != 0) throw ProtocolError("trailing bytes in " + std::string(to_string(tag)) + " payload");
  return out;
}

void send_message(ByteStream& stream, const Message& m) { stream.write(encode_message(m)); }

Message receive_message(ByteStream& stream) {
  std::uint8_t header[5];
  stream.read(header);
  ByteReader<ProtocolError> r(header);
  const auto tag = static_cast<MessageTag>(r.u8());
  if (header[0] < 1 || header[0] > 6) throw ProtocolError("unknown message tag " + std::to_string(header[0]));
  const auto length = r.u32();
  std::vector<std::uint8_t> payload(length);
  stream.read(payload);
  return decode_message(tag, payload);
}

// --- in-process pipe -------------------------------------------------------

namespace {

struct PipeState {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::uint8_t> queue[2];  // queue[i] is read by side i
  bool closed[2] = {false, false};
};

class PipeEnd final : public ByteStream {
 public:
  PipeEnd(std::shared_ptr<PipeState> state, int side) : state_(std::move(state)), side_(side) {}
  ~PipeEnd() override { close(); }

  void write(std::span<const std::uint8_t> bytes) override {
    std::lock_guard lock(state_->mutex);
    if (state_->closed[side_] || state_->closed[1 - side_]) throw ProtocolError("connection closed");
    auto& q = state_->queue[1 - side_];
    q.insert(q.end(), bytes.begin(), bytes.end());
    state_->cv.notify_all();
  }

  void read(std::span<std::uint8_t> bytes) override {
    std::unique_lock lock(state_->mutex);
    auto& q = state_->queue[side_];
    state_->cv.wait(lock, [&] { return q.size() >= bytes.size() || state_->closed[1 - side_] || state_->closed[side_]; });
    if (q.size() < bytes.size()) throw ProtocolError("connection closed");
    std::copy_n(q.begin(), bytes.size(), bytes.begin());
    q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(bytes.size()));
  }

  void close() override {
    std::lock_guard lock(state_->mutex);
    state_->closed[side_] = true;
    state_->cv.notify_all();
  }

 private:
  std::shared_ptr<PipeState> state_;
  int side_;
};

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe() {
  auto state = std::make_shared<PipeState>();
  return {std::make_unique<PipeEnd>(state, 0), std::make_unique<PipeEnd>(state, 1)};
}

// --- TCP -------------------------------------------------------------------

namespace {

std::string errno_text() { return std::strerror(errno); }

class TcpStream final : public ByteStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpStream() override { close(); }

  void write(std::span<const std::uint8_t> bytes) override {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("send failed: " + errno_text());
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  void read(std::span<std::uint8_t> bytes) override {
    std::size_t got = 0;
    while (got < bytes.size()) {
      const auto n = ::recv(fd_, bytes.data() + got, bytes.size() - got, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("recv failed: " + errno_text());
      }
      if (n == 0) throw ProtocolError("connection closed");
      got += static_cast<std::size_t>(n);
    }
  }

  void close() override {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) ::freeaddrinfo(head);
  }
};

void resolve(const std::string& host, std::uint16_t port, bool passive, AddrInfo& out) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  const auto service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.head);
  if (rc != 0) throw ProtocolError("cannot resolve " + host + ": " + ::gai_strerror(rc));
}

}  // namespace

std::unique_ptr<ByteStream> tcp_connect(const std::string& host, std::uint16_t port,
                                        std::chrono::milliseconds timeout) {
  AddrInfo info;
  resolve(host, port, false, info);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const int fd = ::socket(info.head->ai_family, info.head->ai_socktype, info.head->ai_protocol);
    if (fd < 0) throw ProtocolError("socket failed: " + errno_text());
    if (::connect(fd, info.head->ai_addr, info.head->ai_addrlen) == 0) return std::make_unique<TcpStream>(fd);
    const int err = errno;
    ::close(fd);
    // The peer may not be listening yet; retry until the deadline.
    if ((err != ECONNREFUSED && err != ETIMEDOUT) || timeout.count() <= 0 ||
        std::chrono::steady_clock::now() >= deadline) {
      throw ProtocolError("cannot connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  AddrInfo info;
  resolve(host, port, true, info);
  fd_ = ::socket(info.head->ai_family, info.head->ai_socktype, info.head->ai_protocol);
  if (fd_ < 0) throw ProtocolError("socket failed: " + errno_text());
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, info.head->ai_addr, info.head->ai_addrlen) != 0 || ::listen(fd_, 64) != 0) {
    const auto msg = errno_text();
    ::close(fd_);
    throw ProtocolError("cannot listen on " + host + ":" + std::to_string(port) + ": " + msg);
  }
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<ByteStream> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  while (true) {
    const int rc = ::poll(&pfd, 1, timeout.count() > 0 ? static_cast<int>(timeout.count()) : -1);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw ProtocolError("poll failed: " + errno_text());
    if (rc == 0) throw ProtocolError("timed out waiting for a connection on port " + std::to_string(port_));
    break;
  }
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw ProtocolError("accept failed: " + errno_text());
  return std::make_unique<TcpStream>(fd);
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) throw UsageError("expected host:port, got '" + endpoint + "'");
  const auto host = endpoint.substr(0, colon);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(endpoint.substr(colon + 1), &used);
    if (used != endpoint.size() - colon - 1) throw std::invalid_argument("port");
  } catch (const std::exception&) {
    throw UsageError("invalid port in '" + endpoint + "'");
  }
  if (port > 65535) throw UsageError("invalid port in '" + endpoint + "'");
  return {host.empty() ? std::string("0.0.0.0") : host, static_cast<std::uint16_t>(port)};
}

}  // namespace lightwaves
