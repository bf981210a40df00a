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

#include "channel.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "msfi/errors.hpp"

namespace msfi::detail {

FdChannel::FdChannel(int read_fd, int write_fd, bool is_socket)
    : read_fd_(read_fd), write_fd_(write_fd), is_socket_(is_socket) {
  const int flags = fcntl(write_fd_, F_GETFL);
  fcntl(write_fd_, F_SETFL, flags | O_NONBLOCK);
  if (read_fd_ != write_fd_) {
    const int rflags = fcntl(read_fd_, F_GETFL);
    fcntl(read_fd_, F_SETFL, rflags | O_NONBLOCK);
  }
}

FdChannel::~FdChannel() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
}

void FdChannel::close_write() {
  if (write_fd_ < 0) return;
  if (write_fd_ == read_fd_) {
    ::shutdown(write_fd_, SHUT_WR);
  } else {
    ::close(write_fd_);
  }
  write_fd_ = -1;
}

void FdChannel::exchange(const std::vector<std::string>& lines, std::size_t replies,
                         const std::function<bool(const std::string&)>& on_line, double timeout_s) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  if (!out.empty() && write_fd_ < 0) throw OracleError("oracle channel is closed for writing");
  std::size_t sent = 0, received = 0;
  const int timeout_ms = static_cast<int>(timeout_s * 1000.0);
  char buf[1 << 16];

  auto drain_lines = [&] {
    std::size_t nl;
    while (received < replies && (nl = pending_.find('\n')) != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (on_line(line)) ++received;
    }
  };
  drain_lines();

  while (sent < out.size() || received < replies) {
    pollfd fds[2];
    int nfds = 0;
    const bool want_write = sent < out.size();
    if (read_fd_ == write_fd_) {
      fds[nfds++] = {read_fd_, static_cast<short>(POLLIN | (want_write ? POLLOUT : 0)), 0};
    } else {
      fds[nfds++] = {read_fd_, POLLIN, 0};
      if (want_write) fds[nfds++] = {write_fd_, POLLOUT, 0};
    }
    const int ready = ::poll(fds, static_cast<nfds_t>(nfds), timeout_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) {
      throw TimeoutError("oracle did not respond within " + std::to_string(timeout_s) + " s");
    }
    for (int i = 0; i < nfds; ++i) {
      if ((fds[i].revents & POLLOUT) && want_write) {
        const ssize_t n = is_socket_ ? ::send(write_fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL)
                                     : ::write(write_fd_, out.data() + sent, out.size() - sent);
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          throw OracleError(std::string("oracle transport write failed: ") + std::strerror(errno));
        }
        if (n > 0) sent += static_cast<std::size_t>(n);
      }
      if (fds[i].fd == read_fd_ && (fds[i].revents & (POLLIN | POLLHUP | POLLERR))) {
        const ssize_t n = ::read(read_fd_, buf, sizeof buf);
        if (n == 0) throw OracleError("oracle closed the connection");
        if (n < 0) {
          if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
          throw OracleError(std::string("oracle transport read failed: ") + std::strerror(errno));
        }
        pending_.append(buf, static_cast<std::size_t>(n));
        drain_lines();
      }
    }
  }
}

}  // namespace msfi::detail
