// Copyright 2026 The HierGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace hiergen::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // includes query, always starts with '/'
};

Url parse_url(const std::string& url);

enum class Outcome { kOk, kConnectFailed, kTimeout, kOtherTransportError };

struct Response {
  Outcome outcome = Outcome::kOk;
  int status = 0;
  std::string body;
  std::string error;  // transport error description
};

struct Request {
  std::string url;
  std::string body;
  std::map<std::string, std::string> headers;
  std::chrono::milliseconds timeout{30000};
};

/// Never throws on transport failure; inspect `outcome`.
Response post_json(const Request& request);
Response get(const std::string& url, std::chrono::milliseconds timeout);

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using Handler = std::function<Reply(const std::string& body)>;

/// Minimal HTTP server on a background thread (JSON POST/GET routes).
class Server {
 public:
  Server();
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void post(const std::string& path, Handler handler);
  void get(const std::string& path, Handler handler);

  /// Binds (port 0 = ephemeral) and starts serving; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hiergen::http
