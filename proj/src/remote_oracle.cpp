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

#include <fcntl.h>
#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

#include "channel.hpp"
#include "msfi/oracle.hpp"
#include "msfi/protocol.hpp"

namespace msfi {

namespace {

using nlohmann::json;

class RemoteOracle : public Oracle {
 public:
  RemoteOracle(std::unique_ptr<detail::FdChannel> channel, pid_t child)
      : channel_(std::move(channel)), child_(child), timeout_(oracle_timeout_seconds()) {}

  ~RemoteOracle() override {
    channel_->close_write();
    if (child_ > 0) {
      // Give the server a moment to exit on EOF before killing it.
      for (int i = 0; i < 100; ++i) {
        if (::waitpid(child_, nullptr, WNOHANG) != 0) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      ::kill(child_, SIGKILL);
      ::waitpid(child_, nullptr, 0);
    }
  }

 protected:
  OracleMeta do_handshake() override {
    std::lock_guard lock(mutex_);
    OracleMeta meta;
    channel_->exchange({protocol::encode_hello()}, 1,
                       [&](const std::string& line) {
                         const json msg = protocol::parse_message(line);
                         if (msg["type"] == "error") {
                           throw OracleError("oracle refused handshake: " + msg.value("message", std::string()));
                         }
                         meta = protocol::decode_meta(msg);
                         return true;
                       },
                       timeout_);
    num_classes_ = meta.num_classes;
    return meta;
  }

  std::vector<Probabilities> do_predict(std::span<const Image> inputs) override {
    std::lock_guard lock(mutex_);
    std::vector<std::string> requests;
    std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> slots;  // id -> (offset, count)
    for (std::size_t start = 0; start < inputs.size(); start += kMaxBatch) {
      const std::size_t count = std::min(kMaxBatch, inputs.size() - start);
      const std::uint64_t id = next_id_++;
      slots[id] = {start, count};
      requests.push_back(protocol::encode_predict(id, inputs.subspan(start, count)));
    }
    std::vector<Probabilities> out(inputs.size());
    channel_->exchange(requests, requests.size(),
                       [&](const std::string& line) {
                         const json msg = protocol::parse_message(line);
                         if (msg["type"] == "error") {
                           throw OracleError("oracle reported an error: " + msg.value("message", std::string()));
                         }
                         if (msg["type"] != "result") {
                           throw ProtocolError("unexpected message type '" + msg["type"].get<std::string>() + "'");
                         }
                         if (!msg.contains("id") || !msg["id"].is_number_unsigned()) {
                           throw ProtocolError("result without a valid id");
                         }
                         const auto id = msg["id"].get<std::uint64_t>();
                         auto it = slots.find(id);
                         if (it == slots.end()) throw ProtocolError("reply for unknown or repeated id " + std::to_string(id));
                         auto probs = protocol::decode_probs(msg);
                         protocol::check_probabilities(probs, it->second.second, num_classes_);
                         for (std::size_t i = 0; i < probs.size(); ++i) out[it->second.first + i] = std::move(probs[i]);
                         slots.erase(it);
                         return true;
                       },
                       timeout_);
    return out;
  }

 private:
  std::unique_ptr<detail::FdChannel> channel_;
  pid_t child_;
  double timeout_;
  std::mutex mutex_;
  std::uint64_t next_id_ = 1;
  int num_classes_ = 0;
};

std::unique_ptr<Oracle> spawn_exec(const std::string& command) {
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw OracleError(std::string("pipe failed: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw OracleError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  return std::make_unique<RemoteOracle>(
      std::make_unique<detail::FdChannel>(from_child[0], to_child[1], false), pid);
}

std::unique_ptr<Oracle> connect_tcp(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw UsageError("tcp oracle address must be host:port");
  const std::string host = address.substr(0, colon), port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw OracleError("cannot resolve " + address + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw OracleError("cannot connect to oracle at " + address);
  return std::make_unique<RemoteOracle>(std::make_unique<detail::FdChannel>(fd, fd, true), -1);
}

std::unique_ptr<Oracle> make_builtin(const std::string& name, const Shape& shape) {
  if (name == "t1c-shape") return std::make_unique<T1cShapeOracle>(shape);
  if (name == "flair-shape") return std::make_unique<DualModalityOracle>(0.0, 1.0, shape);
  if (name == "constant") return std::make_unique<ConstantOracle>(Probabilities{0.5, 0.5}, shape);
  const std::string dual = "dual-modality:";
  if (name.rfind(dual, 0) == 0) {
    const std::string args = name.substr(dual.size());
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw UsageError("dual-modality needs <w_t1c>,<w_flair>");
    try {
      return std::make_unique<DualModalityOracle>(std::stod(args.substr(0, comma)),
                                                  std::stod(args.substr(comma + 1)), shape);
    } catch (const std::invalid_argument&) {
      throw UsageError("dual-modality weights must be numbers");
    }
  }
  throw UsageError("unknown builtin oracle '" + name +
                   "' (expected t1c-shape, flair-shape, dual-modality:<a>,<b>, constant)");
}

}  // namespace

std::unique_ptr<Oracle> make_oracle(const std::string& spec, const Shape& expected_shape) {
  std::unique_ptr<Oracle> oracle;
  if (spec.rfind("builtin:", 0) == 0) {
    oracle = make_builtin(spec.substr(8), expected_shape);
  } else if (spec.rfind("exec:", 0) == 0) {
    oracle = spawn_exec(spec.substr(5));
  } else if (spec.rfind("tcp:", 0) == 0) {
    oracle = connect_tcp(spec.substr(4));
  } else {
    throw UsageError("oracle spec must start with builtin:, exec: or tcp: (got '" + spec + "')");
  }
  const OracleMeta& meta = oracle->handshake();
  if (!expected_shape.empty() && meta.input_shape != expected_shape) {
    throw OracleError("oracle '" + meta.name + "' expects input shape " +
                      shape_to_string(meta.input_shape) + " but the dataset has " +
                      shape_to_string(expected_shape));
  }
  return oracle;
}

}  // namespace msfi
