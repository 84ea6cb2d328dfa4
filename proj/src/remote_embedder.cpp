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
#include "protestlens/remote_embedder.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <utility>

#include "httplib.h"
#include "protestlens/error.hpp"

namespace protestlens {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // optional path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.substr(0, scheme) != "http")
    throw ConfigError("endpoint '" + url + "' must be an http:// URL");
  const auto path = url.find('/', scheme + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path);
  if (path != std::string::npos) ep.prefix = url.substr(path);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  if (ep.origin.size() <= scheme + 3) throw ConfigError("endpoint '" + url + "' has no host");
  return ep;
}

httplib::Client make_client(const Endpoint& ep, std::chrono::milliseconds timeout) {
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  client.set_read_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  client.set_write_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  return client;
}

[[noreturn]] void raise_for(httplib::Error err, const std::string& what) {
  throw RetriableError(what + ": " + httplib::to_string(err));
}

json parse_body(const std::string& body, const std::string& what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(what + ": response is not JSON: " + e.what());
  }
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(std::string endpoint) : RemoteEmbedder(std::move(endpoint), Options{}) {}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, Options options)
    : endpoint_(std::move(endpoint)), options_(options) {
  split_endpoint(endpoint_);
  if (options_.max_batch == 0) options_.max_batch = 1;
  if (options_.max_concurrency == 0) options_.max_concurrency = 1;
}

HealthStatus RemoteEmbedder::health() const {
  const Endpoint ep = split_endpoint(endpoint_);
  auto client = make_client(ep, options_.timeout);
  auto res = client.Get(ep.prefix + "/v1/health");
  if (!res) raise_for(res.error(), "GET /v1/health");
  if (res->status != 200)
    throw TransportError(res->status, "GET /v1/health returned HTTP " + std::to_string(res->status));
  const json body = parse_body(res->body, "GET /v1/health");
  if (!body.is_object() || !body.contains("status") || !body["status"].is_string())
    throw ProtocolError("GET /v1/health: missing status");
  HealthStatus h;
  h.status = body["status"].get<std::string>();
  if (body.contains("model") && body["model"].is_string()) h.model = body["model"].get<std::string>();
  return h;
}

json make_embed_request(const std::vector<TokenSequence>& batch, const EmbedConfig& cfg) {
  json tokens = json::array();
  for (const TokenSequence& seq : batch) {
    const std::size_t n = std::min(seq.size(), cfg.max_tokens);
    tokens.push_back(std::vector<std::string>(seq.tokens.begin(), seq.tokens.begin() + n));
  }
  return {{"tokens", std::move(tokens)}, {"out_positions", cfg.out_positions}, {"dim", cfg.dim}};
}

std::vector<EmbeddedSequence> parse_embed_response(const json& body, std::size_t expected_batch,
                                                   const EmbedConfig& cfg) {
  if (!body.is_object() || !body.contains("vectors") || !body["vectors"].is_array())
    throw ProtocolError("embed response: missing 'vectors' array");
  if (!body.contains("dim") || !body["dim"].is_number_integer())
    throw ProtocolError("embed response: missing integer 'dim'");
  const auto dim = body["dim"].get<long long>();
  if (dim != static_cast<long long>(cfg.dim))
    throw ProtocolError("embed response: dim " + std::to_string(dim) + " != expected " +
                        std::to_string(cfg.dim));
  const json& vectors = body["vectors"];
  if (vectors.size() != expected_batch)
    throw ProtocolError("embed response: " + std::to_string(vectors.size()) +
                        " matrices for a batch of " + std::to_string(expected_batch));
  std::vector<EmbeddedSequence> out;
  out.reserve(expected_batch);
  const auto L = static_cast<Eigen::Index>(cfg.out_positions);
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  for (std::size_t b = 0; b < vectors.size(); ++b) {
    const json& m = vectors[b];
    if (!m.is_array() || m.size() != cfg.out_positions)
      throw ProtocolError("embed response: matrix " + std::to_string(b) + " does not have " +
                          std::to_string(cfg.out_positions) + " rows");
    EmbeddedSequence seq{Tensor2(L, d)};
    for (Eigen::Index i = 0; i < L; ++i) {
      const json& row = m[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != cfg.dim)
        throw ProtocolError("embed response: matrix " + std::to_string(b) + " row " +
                            std::to_string(i) + " does not have " + std::to_string(cfg.dim) +
                            " entries");
      for (Eigen::Index k = 0; k < d; ++k) {
        const json& v = row[static_cast<std::size_t>(k)];
        if (!v.is_number()) throw ProtocolError("embed response: non-numeric entry");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ProtocolError("embed response: non-finite entry");
        seq.vectors(i, k) = x;
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<EmbeddedSequence> RemoteEmbedder::embed_chunk(const std::vector<TokenSequence>& chunk,
                                                          const EmbedConfig& cfg) const {
  const Endpoint ep = split_endpoint(endpoint_);
  const std::string body = make_embed_request(chunk, cfg).dump();
  for (unsigned attempt = 0;; ++attempt) {
    try {
      auto client = make_client(ep, options_.timeout);
      auto res = client.Post(ep.prefix + "/v1/embed", body, "application/json");
      if (!res) raise_for(res.error(), "POST /v1/embed");
      if (res->status != 200)
        throw TransportError(res->status, "POST /v1/embed returned HTTP " +
                                              std::to_string(res->status) + ": " + res->body);
      return parse_embed_response(parse_body(res->body, "POST /v1/embed"), chunk.size(), cfg);
    } catch (const RetriableError&) {
      if (attempt >= options_.retries) throw;
    }
  }
}

std::vector<EmbeddedSequence> RemoteEmbedder::embed(const std::vector<TokenSequence>& batch,
                                                    const EmbedConfig& cfg) const {
  cfg.validate();
  if (batch.empty()) throw DomainError("embed_remote: empty batch");
  std::vector<std::vector<TokenSequence>> chunks;
  for (std::size_t i = 0; i < batch.size(); i += options_.max_batch) {
    const std::size_t end = std::min(batch.size(), i + options_.max_batch);
    chunks.emplace_back(batch.begin() + static_cast<std::ptrdiff_t>(i),
                        batch.begin() + static_cast<std::ptrdiff_t>(end));
  }
  std::vector<EmbeddedSequence> out;
  out.reserve(batch.size());
  for (std::size_t wave = 0; wave < chunks.size(); wave += options_.max_concurrency) {
    const std::size_t end = std::min(chunks.size(), wave + options_.max_concurrency);
    std::vector<std::future<std::vector<EmbeddedSequence>>> pending;
    for (std::size_t c = wave; c < end; ++c)
      pending.push_back(std::async(std::launch::async,
                                   [this, &chunks, &cfg, c] { return embed_chunk(chunks[c], cfg); }));
    for (auto& f : pending) {
      auto part = f.get();
      std::move(part.begin(), part.end(), std::back_inserter(out));
    }
  }
  return out;
}

std::vector<EmbeddedSequence> embed_remote(const std::vector<TokenSequence>& batch,
                                           const std::string& endpoint, const EmbedConfig& cfg) {
  return RemoteEmbedder(endpoint).embed(batch, cfg);
}

}  // namespace protestlens
