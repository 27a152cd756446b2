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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "hiergen/http.hpp"

#include <thread>

#include "hiergen/error.hpp"

namespace hiergen::http {

Url parse_url(const std::string& url) {
  Url out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorCode::kInvalidArgument, "URL lacks a scheme: " + url);
  out.scheme = url.substr(0, scheme_end);
  if (out.scheme != "http" && out.scheme != "https") {
    fail(ErrorCode::kInvalidArgument, "unsupported URL scheme: " + out.scheme);
  }
  const auto host_start = scheme_end + 3;
  auto path_start = url.find('/', host_start);
  const std::string authority =
      url.substr(host_start, path_start == std::string::npos ? std::string::npos
                                                             : path_start - host_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos && authority.find(']') == std::string::npos) {
    out.host = authority.substr(0, colon);
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad port in URL: " + url);
    }
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty()) fail(ErrorCode::kInvalidArgument, "URL lacks a host: " + url);
  return out;
}

namespace {

httplib::Client make_client(const Url& u, std::chrono::milliseconds timeout) {
  httplib::Client client(u.scheme + "://" + u.host + ":" + std::to_string(u.port));
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  client.set_keep_alive(false);
  return client;
}

Response to_response(const httplib::Result& result, std::chrono::steady_clock::time_point start,
                     std::chrono::milliseconds timeout) {
  Response out;
  if (!result) {
    const auto err = result.error();
    out.error = httplib::to_string(err);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (err == httplib::Error::Connection || err == httplib::Error::SSLConnection) {
      out.outcome = Outcome::kConnectFailed;
    } else if (err == httplib::Error::ConnectionTimeout ||
               (err == httplib::Error::Read && elapsed >= timeout * 9 / 10)) {
      out.outcome = Outcome::kTimeout;
    } else {
      out.outcome = Outcome::kOtherTransportError;
    }
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  return out;
}

}  // namespace

Response post_json(const Request& request) {
  const Url u = parse_url(request.url);
  auto client = make_client(u, request.timeout);
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  const auto start = std::chrono::steady_clock::now();
  const auto result = client.Post(u.path, headers, request.body, "application/json");
  return to_response(result, start, request.timeout);
}

Response get(const std::string& url, std::chrono::milliseconds timeout) {
  const Url u = parse_url(url);
  auto client = make_client(u, timeout);
  const auto start = std::chrono::steady_clock::now();
  const auto result = client.Get(u.path);
  return to_response(result, start, timeout);
}

struct Server::Impl {
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;
};

Server::Server() : impl_(std::make_unique<Impl>()) {}

Server::~Server() { stop(); }

namespace {

void install(httplib::Server& server, bool is_post, const std::string& path, Handler handler) {
  auto fn = [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    Reply reply;
    try {
      reply = handler(req.body);
    } catch (const std::exception& e) {
      reply.status = 500;
      reply.body = std::string("{\"error\":\"") + "internal error" + "\"}";
      (void)e;
    }
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  if (is_post) server.Post(path, fn);
  else server.Get(path, fn);
}

}  // namespace

void Server::post(const std::string& path, Handler handler) {
  install(impl_->server, true, path, std::move(handler));
}

void Server::get(const std::string& path, Handler handler) {
  install(impl_->server, false, path, std::move(handler));
}

int Server::start(const std::string& host, int port) {
  impl_->host = host;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      fail(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->port = port;
  }
  if (impl_->port <= 0) fail(ErrorCode::kIoError, "cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void Server::run(const std::string& host, int port) {
  impl_->host = host;
  impl_->port = port;
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Server::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string Server::base_url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

}  // namespace hiergen::http
