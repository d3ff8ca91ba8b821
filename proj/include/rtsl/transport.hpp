// Line transports: an in-process channel and TCP stream sockets.

#ifndef RTSL_TRANSPORT_HPP
#define RTSL_TRANSPORT_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace rtsl {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One end of a bidirectional line stream. Safe to use from two threads.
class Connection {
 public:
  virtual ~Connection() = default;
  // Silently dropped once closed.
  virtual void send(const std::string& line) = 0;
  virtual std::optional<std::string> try_receive() = 0;
  virtual std::optional<std::string> receive(std::chrono::milliseconds timeout) = 0;
  // False once the peer is gone and every buffered line was read.
  virtual bool open() const = 0;
  virtual void close() = 0;
};

std::pair<std::shared_ptr<Connection>, std::shared_ptr<Connection>> make_channel();

class TcpListener {
 public:
  // Port 0 picks a free port. Throws TransportError when binding fails.
  explicit TcpListener(std::uint16_t port, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Null on timeout.
  std::shared_ptr<Connection> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::shared_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port);

}  // namespace rtsl

#endif  // RTSL_TRANSPORT_HPP
