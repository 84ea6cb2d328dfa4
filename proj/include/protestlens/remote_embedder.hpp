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
#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "protestlens/embeddings.hpp"

namespace protestlens {

struct HealthStatus {
  std::string status;
  std::string model;
};

// Client for the contextual-embedding service.
//
//   POST /v1/embed   {"tokens": [[str...]...], "out_positions": int, "dim": int}
//                 -> {"vectors": [[[num...]...]...], "dim": int}
//   GET  /v1/health -> {"status": "ok", "model": str}
//
// Batches larger than max_batch are split into chunks sent concurrently;
// results are reassembled in input order. The client holds no mutable state
// and may be shared between threads.
class RemoteEmbedder {
 public:
  struct Options {
    std::chrono::milliseconds timeout{30000};
    std::size_t max_batch = 16;
    std::size_t max_concurrency = 4;
    unsigned retries = 2;  // extra attempts after a RetriableError
  };

  explicit RemoteEmbedder(std::string endpoint);
  RemoteEmbedder(std::string endpoint, Options options);

  HealthStatus health() const;

  // Tokens are truncated to cfg.max_tokens (not padded) before sending.
  std::vector<EmbeddedSequence> embed(const std::vector<TokenSequence>& batch,
                                      const EmbedConfig& cfg) const;

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::vector<EmbeddedSequence> embed_chunk(const std::vector<TokenSequence>& chunk,
                                            const EmbedConfig& cfg) const;

  std::string endpoint_;
  Options options_;
};

nlohmann::json make_embed_request(const std::vector<TokenSequence>& batch, const EmbedConfig& cfg);

// Validates a response body against the wire contract; ProtocolError on
// any mismatch (batch size, positions, dim, non-numbers, non-finite).
std::vector<EmbeddedSequence> parse_embed_response(const nlohmann::json& body,
                                                   std::size_t expected_batch,
                                                   const EmbedConfig& cfg);

std::vector<EmbeddedSequence> embed_remote(const std::vector<TokenSequence>& batch,
                                           const std::string& endpoint, const EmbedConfig& cfg);

}  // namespace protestlens
