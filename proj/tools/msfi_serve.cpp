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

// Serves a builtin oracle over the wire protocol on stdio or TCP. Used as a
// loopback peer in tests and as a reference server for external clients.

#include <unistd.h>

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "msfi/oracle.hpp"
#include "msfi/oracle_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve a builtin oracle over the msfi wire protocol", "msfi-serve"};
  std::string spec = "builtin:t1c-shape";
  std::vector<std::size_t> shape{4, 128, 128};
  int port = -1;
  int connections = -1;
  msfi::ServeOptions options;
  app.add_option("--oracle", spec, "Builtin oracle spec");
  app.add_option("--shape", shape, "Input shape announced in the handshake")->delimiter(',');
  app.add_option("--tcp", port, "Listen on 127.0.0.1:<port> instead of stdio (0 = any free port)");
  app.add_option("--connections", connections, "Exit after serving this many TCP connections");
  app.add_flag("--reverse", options.reverse_replies, "Answer buffered requests in reverse order");
  app.add_option("--protocol-version", options.protocol_version, "Version announced in meta");
  app.add_option("--probability-scale", options.probability_scale, "Scale applied to probabilities");
  CLI11_PARSE(app, argc, argv);

  std::signal(SIGPIPE, SIG_IGN);
  try {
    if (spec.rfind("builtin:", 0) != 0) throw msfi::UsageError("msfi-serve only serves builtin oracles");
    auto oracle = msfi::make_oracle(spec, shape);
    if (port < 0) {
      msfi::serve_stream(*oracle, STDIN_FILENO, STDOUT_FILENO, options);
      return 0;
    }
    int bound = 0;
    const int fd = msfi::listen_tcp(port, &bound);
    std::cout << "listening " << bound << std::endl;
    msfi::serve_tcp(*oracle, fd, options, connections);
    ::close(fd);
  } catch (const msfi::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const msfi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
