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

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace msfi::detail {

/// Line-oriented duplex channel over a pair of file descriptors (a pipe pair
/// or one socket). Writes and reads are interleaved with poll() so a peer
/// that answers while we are still sending can never deadlock us.
class FdChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool is_socket);
  ~FdChannel();
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  /// Sends every line (a '\n' is appended to each) and calls on_line for
  /// each received line until it returns true for `replies` lines in total.
  /// Throws TimeoutError when no progress is made for timeout_s seconds and
  /// OracleError when the peer goes away.
  void exchange(const std::vector<std::string>& lines, std::size_t replies,
                const std::function<bool(const std::string&)>& on_line, double timeout_s);

  void close_write();

 private:
  int read_fd_;
  int write_fd_;
  bool is_socket_;
  std::string pending_;  // bytes received after the last complete line
};

}  // namespace msfi::detail
