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

#include "msfi/oracle.hpp"

namespace msfi {

struct ServeOptions {
  /// Version announced in the meta reply.
  int protocol_version = 1;
  /// Answer each burst of buffered requests in reverse order.
  bool reverse_replies = false;
  /// Multiplies every returned probability (1 = faithful).
  double probability_scale = 1.0;
};

/// Speaks the oracle protocol over a pair of descriptors until EOF.
void serve_stream(Oracle& oracle, int in_fd, int out_fd, const ServeOptions& options = {});

/// Binds a listening TCP socket on 127.0.0.1; port 0 picks a free port,
/// which is written to *bound_port.
int listen_tcp(int port, int* bound_port);

/// Accepts connections one at a time and serves each until it closes.
/// max_connections < 0 serves forever.
void serve_tcp(Oracle& oracle, int listen_fd, const ServeOptions& options = {},
               int max_connections = -1);

}  // namespace msfi
