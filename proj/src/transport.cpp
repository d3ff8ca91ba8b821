#include "rtsl/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace rtsl {

namespace {

// Thread-safe line queue with an end-of-stream flag.
class LineQueue {
 public:
  void push(std::string line) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      lines_.push_back(std::move(line));
    }
    cv_.notify_all();
  }
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }
  std::optional<std::string> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !lines_.empty() || closed_; });
    if (lines_.empty()) return std::nullopt;
    std::string line = std::move(lines_.front());
    lines_.pop_front();
    return line;
  }
  bool drained() const {
    std::lock_guard lock(mu_);
    return closed_ && lines_.empty();
  }
  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> lines_;
  bool closed_ = false;
};

class ChannelEnd : public Connection {
 public:
  ChannelEnd(std::shared_ptr<LineQueue> in, std::shared_ptr<LineQueue> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~ChannelEnd() override { close(); }

  void send(const std::string& line) override { out_->push(line); }
  std::optional<std::string> try_receive() override { return in_->pop(std::chrono::milliseconds(0)); }
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override { return in_->pop(timeout); }
  bool open() const override { return !in_->drained(); }
  void close() override {
    // Lines already sent stay readable by the peer.
    out_->close();
  }

 private:
  std::shared_ptr<LineQueue> in_;
  std::shared_ptr<LineQueue> out_;
};

class TcpConnection : public Connection {
 public:
  explicit TcpConnection(int fd) : fd_(fd) {
    reader_ = std::thread([this] { read_loop(); });
  }
  ~TcpConnection() override {
    close();
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  void send(const std::string& line) override {
    std::lock_guard lock(write_mu_);
    if (shut_) return;
    std::string buf = line + "\n";
    std::size_t off = 0;
    while (off < buf.size()) {
      ssize_t n = ::send(fd_, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return;
      off += static_cast<std::size_t>(n);
    }
  }
  std::optional<std::string> try_receive() override { return inbox_.pop(std::chrono::milliseconds(0)); }
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override { return inbox_.pop(timeout); }
  bool open() const override { return !inbox_.drained(); }
  void close() override {
    std::lock_guard lock(write_mu_);
    if (shut_) return;
    shut_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  void read_loop() {
    std::string pending;
    char buf[4096];
    while (true) {
      ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      pending.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = pending.find('\n')) != std::string::npos) {
        std::string line = pending.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        inbox_.push(std::move(line));
        pending.erase(0, nl + 1);
      }
    }
    if (!pending.empty()) inbox_.push(pending);
    inbox_.close();
  }

  int fd_;
  std::thread reader_;
  LineQueue inbox_;
  std::mutex write_mu_;
  bool shut_ = false;
};

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
    throw TransportError("bad address " + host);
  }
  return addr;
}

}  // namespace

std::pair<std::shared_ptr<Connection>, std::shared_ptr<Connection>> make_channel() {
  auto a = std::make_shared<LineQueue>();
  auto b = std::make_shared<LineQueue>();
  return {std::make_shared<ChannelEnd>(a, b), std::make_shared<ChannelEnd>(b, a)};
}

TcpListener::TcpListener(std::uint16_t port, const std::string& host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = make_addr(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 8) < 0) {
    std::string why = std::strerror(errno);
    ::close(fd_);
    throw TransportError("cannot listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::shared_ptr<Connection> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r <= 0) return nullptr;
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return nullptr;
  return std::make_shared<TcpConnection>(fd);
}

std::shared_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = make_addr(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    std::string why = std::strerror(errno);
    ::close(fd);
    throw TransportError("cannot connect to " + host + ":" + std::to_string(port) + ": " + why);
  }
  return std::make_shared<TcpConnection>(fd);
}

}  // namespace rtsl
