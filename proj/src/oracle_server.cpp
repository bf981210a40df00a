/*
 * Copyright 2026 The msfi-eval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "msfi/oracle_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>
#include <vector>

#include "msfi/protocol.hpp"

namespace msfi {

namespace {

using nlohmann::json;

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("server write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

bool input_waiting(int fd) {
  pollfd p{fd, POLLIN, 0};
  return ::poll(&p, 1, 0) > 0;
}

std::string handle(Oracle& oracle, const std::string& line, const ServeOptions& options) {
  json msg;
  try {
    msg = protocol::parse_message(line);
  } catch (const ProtocolError& e) {
    return protocol::encode_error(e.what());
  }
  const std::string type = msg["type"];
  if (type == "hello") {
    if (msg.value("version", 0) != protocol::kVersion) {
      return protocol::encode_error("unsupported protocol version " + msg.value("version", json()).dump());
    }
    return protocol::encode_meta(oracle.handshake(), options.protocol_version);
  }
  if (type == "predict") {
    const std::uint64_t id = msg.value("id", std::uint64_t{0});
    try {
      const auto inputs = protocol::decode_inputs(msg);
      auto probs = oracle.predict_batch(inputs);
      for (auto& p : probs) {
        for (double& v : p) v *= options.probability_scale;
      }
      return protocol::encode_result(id, probs);
    } catch (const Error& e) {
      return protocol::encode_error(e.what(), &id);
    }
  }
  return protocol::encode_error("unknown message type '" + type + "'");
}

}  // namespace

void serve_stream(Oracle& oracle, int in_fd, int out_fd, const ServeOptions& options) {
  oracle.handshake();
  std::string buffer;
  std::vector<std::string> replies;
  char chunk[1 << 16];
  bool eof = false;
  while (!eof) {
    const ssize_t n = ::read(in_fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) eof = true;
    buffer.append(chunk, static_cast<std::size_t>(std::max<ssize_t>(n, 0)));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.empty()) continue;
      replies.push_back(handle(oracle, line, options));
    }
    if (replies.empty() || (!eof && input_waiting(in_fd))) continue;
    std::string out;
    if (options.reverse_replies) {
      for (auto it = replies.rbegin(); it != replies.rend(); ++it) out += *it + "\n";
    } else {
      for (const auto& r : replies) out += r + "\n";
    }
    replies.clear();
    write_all(out_fd, out);
  }
}

int listen_tcp(int port, int* bound_port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw OracleError(std::string("socket failed: ") + std::strerror(errno));
  const int yes = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 4) != 0) {
    ::close(fd);
    throw OracleError(std::string("cannot listen on port ") + std::to_string(port) + ": " +
                      std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (bound_port) *bound_port = ntohs(addr.sin_port);
  return fd;
}

void serve_tcp(Oracle& oracle, int listen_fd, const ServeOptions& options, int max_connections) {
  for (int served = 0; max_connections < 0 || served < max_connections; ++served) {
    const int conn = ::accept(listen_fd, nullptr, nullptr);
    if (conn < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("accept failed: ") + std::strerror(errno));
    }
    try {
      serve_stream(oracle, conn, conn, options);
    } catch (const OracleError&) {
      // The client went away mid-reply; keep serving others.
    }
    ::close(conn);
  }
}

}  // namespace msfi
