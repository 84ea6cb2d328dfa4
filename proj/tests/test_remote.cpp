// Copyright 2026 The ProtestLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "doctest.h"
#include "protestlens/error.hpp"
#include "protestlens/remote_embedder.hpp"
// After Eigen: resolv.h defines a _res macro.
#include "httplib.h"

using namespace protestlens;
using nlohmann::json;

namespace {

// Matrix b has every entry equal to the first token's length plus the row index.
class MockService {
 public:
  MockService() {
    server_.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok","model":"mock-st"})", "application/json");
    });
    server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const json body = json::parse(req.body);
      {
        std::lock_guard lock(mutex_);
        batch_sizes.insert(body["tokens"].size());
        last_request = body;
      }
      if (status != 200) {
        res.status = status;
        res.set_content("overloaded", "text/plain");
        return;
      }
      const std::size_t L = body["out_positions"];
      const std::size_t d = body["dim"];
      json vectors = json::array();
      for (const auto& toks : body["tokens"]) {
        const double base = toks.empty() ? 0.0 : static_cast<double>(toks[0].get<std::string>().size());
        json m = json::array();
        for (std::size_t i = 0; i < L; ++i) m.push_back(std::vector<double>(d, base + static_cast<double>(i)));
        vectors.push_back(m);
      }
      const std::size_t reply_dim = d + static_cast<std::size_t>(dim_offset);
      res.set_content(json{{"vectors", vectors}, {"dim", reply_dim}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockService() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests{0};
  std::atomic<int> status{200};
  std::atomic<int> dim_offset{0};
  std::set<std::size_t> batch_sizes;
  json last_request;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
};

TokenSequence seq(std::vector<std::string> tokens) { return TokenSequence{std::move(tokens), {}}; }

EmbedConfig config(std::size_t max_tokens, std::size_t positions, std::size_t dim) {
  EmbedConfig cfg;
  cfg.max_tokens = max_tokens;
  cfg.out_positions = positions;
  cfg.dim = dim;
  cfg.provider = Provider::Remote;
  return cfg;
}

}  // namespace

TEST_CASE("request format") {
  const json req = make_embed_request({seq({"a", "b", "c"}), seq({"d"})}, config(2, 2, 4));
  CHECK(req["tokens"] == json::parse(R"([["a","b"],["d"]])"));
  CHECK(req["out_positions"] == 2);
  CHECK(req["dim"] == 4);
}

TEST_CASE("health and round trip") {
  MockService mock;
  const RemoteEmbedder client(mock.endpoint());
  const HealthStatus h = client.health();
  CHECK(h.status == "ok");
  CHECK(h.model == "mock-st");

  const auto out = client.embed({seq({"x"}), seq({"yyy", "z"}), seq({"ww"})}, config(8, 3, 5));
  REQUIRE(out.size() == 3);
  const double firsts[] = {1, 3, 2};
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(out[b].positions() == 3);
    CHECK(out[b].dim() == 5);
    CHECK(out[b].vectors(2, 4) == firsts[b] + 2.0);
  }
}

TEST_CASE("batches are chunked and order is preserved") {
  MockService mock;
  RemoteEmbedder::Options opts;
  opts.max_batch = 4;
  opts.max_concurrency = 2;
  const RemoteEmbedder client(mock.endpoint(), opts);
  std::vector<TokenSequence> batch;
  for (std::size_t i = 1; i <= 10; ++i) batch.push_back(seq({std::string(i, 'a')}));
  const auto out = client.embed(batch, config(4, 1, 2));
  REQUIRE(out.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(out[i].vectors(0, 0) == static_cast<double>(i + 1));
  CHECK(mock.requests == 3);
  CHECK(*mock.batch_sizes.rbegin() == 4);
}

TEST_CASE("tokens are truncated before sending") {
  MockService mock;
  const RemoteEmbedder client(mock.endpoint());
  client.embed({seq({"a", "b", "c", "d"})}, config(2, 1, 1));
  CHECK(mock.last_request["tokens"][0].size() == 2);
}

TEST_CASE("error mapping") {
  MockService mock;
  const RemoteEmbedder client(mock.endpoint());
  CHECK_THROWS_AS(client.embed({}, config(4, 2, 2)), DomainError);
  CHECK_THROWS_AS(client.embed({seq({"a"})}, config(2, 4, 2)), ConfigError);

  mock.status = 503;
  try {
    client.embed({seq({"a"})}, config(4, 2, 2));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.status() == 503);
  }
  CHECK(mock.requests == 1);

  mock.status = 200;
  mock.dim_offset = 1;
  CHECK_THROWS_AS(client.embed({seq({"a"})}, config(4, 2, 2)), ProtocolError);

  CHECK_THROWS_AS(RemoteEmbedder("ftp://host"), ConfigError);
  CHECK_THROWS_AS(parse_embed_response(json::parse(R"({"vectors":[[[1]]],"dim":1})"), 2, config(2, 1, 1)),
                  ProtocolError);
  CHECK_THROWS_AS(parse_embed_response(json::parse(R"({"vectors":[[[null]]],"dim":1})"), 1, config(2, 1, 1)),
                  ProtocolError);
  CHECK_THROWS_AS(parse_embed_response(json::parse(R"({"vectors":[[[1,2]]],"dim":1})"), 1, config(2, 1, 1)),
                  ProtocolError);
}

TEST_CASE("unreachable service retries then fails") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteEmbedder::Options opts;
  opts.timeout = std::chrono::milliseconds(500);
  opts.retries = 1;
  const RemoteEmbedder client("http://127.0.0.1:" + std::to_string(port), opts);
  CHECK_THROWS_AS(client.embed({seq({"a"})}, config(4, 2, 2)), RetriableError);
  CHECK_THROWS_AS(client.health(), RetriableError);
}
