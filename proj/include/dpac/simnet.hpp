// Copyright 2026 The DPAC Authors
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
//
// Synchronous round-based message fabric. Payloads travel only along graph
// edges, rounds deliver atomically, and the transcript captures exactly what
// an eavesdropper on the links would see: ciphertexts and public keys during
// the shuffle phase, plaintext states during the consensus phase.

#ifndef DPAC_SIMNET_HPP
#define DPAC_SIMNET_HPP

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpac/common.hpp"
#include "dpac/graph.hpp"

namespace dpac::sim {

enum class Phase { shuffle, consensus };

inline std::string to_string(Phase p) {
  return p == Phase::shuffle ? "shuffle" : "consensus";
}

enum class PayloadKind { public_key, ciphertext, plaintext_state };

inline std::string to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::public_key: return "public-key";
    case PayloadKind::ciphertext: return "ciphertext";
    case PayloadKind::plaintext_state: return "plaintext-state";
  }
  return "?";
}

struct Payload {
  PayloadKind kind = PayloadKind::plaintext_state;
  mpz_class integer;  // public-key modulus or ciphertext residue
  Real state = 0;

  static Payload public_key(mpz_class n) {
    return Payload{PayloadKind::public_key, std::move(n), 0};
  }
  static Payload ciphertext(mpz_class value) {
    return Payload{PayloadKind::ciphertext, std::move(value), 0};
  }
  static Payload plaintext_state(Real x) {
    return Payload{PayloadKind::plaintext_state, mpz_class(0), x};
  }

  std::string text() const {
    if (kind == PayloadKind::plaintext_state) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.21Lg", state);
      return buf;
    }
    return integer.get_str();
  }
};

struct TranscriptRecord {
  long round = 0;
  int sender = 0;
  int receiver = 0;
  Phase phase = Phase::shuffle;
  Payload payload;
};

class Transcript {
 public:
  void append(TranscriptRecord record) {
    const bool state_kind = record.payload.kind == PayloadKind::plaintext_state;
    if (record.phase == Phase::shuffle && state_kind)
      throw IntegrityError("transcript: plaintext state in shuffle phase");
    if (record.phase == Phase::consensus && !state_kind)
      throw IntegrityError("transcript: non-state payload in consensus phase");
    records_.push_back(std::move(record));
  }

  const std::vector<TranscriptRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }

  // Line-delimited JSON, one record per line.
  void to_jsonl(std::ostream& out) const {
    for (const auto& r : records_) {
      out << "{\"round\":" << r.round << ",\"sender\":" << r.sender
          << ",\"receiver\":" << r.receiver << ",\"phase\":\"" << to_string(r.phase)
          << "\",\"kind\":\"" << to_string(r.payload.kind) << "\",\"payload\":\""
          << r.payload.text() << "\"}\n";
    }
  }

 private:
  std::vector<TranscriptRecord> records_;
};

// Read-only projection of what the eavesdropper sees, optionally filtered
// by phase.
inline std::vector<TranscriptRecord> eavesdropper_view(const Transcript& transcript,
                                                       std::optional<Phase> phase = {}) {
  std::vector<TranscriptRecord> view;
  for (const auto& r : transcript.records())
    if (!phase || r.phase == *phase) view.push_back(r);
  return view;
}

class Network {
 public:
  struct Message {
    int sender = 0;
    int receiver = 0;
    Payload payload;
  };

  explicit Network(const net::WeightedGraph& graph, bool record_transcript = true)
      : graph_(&graph), record_(record_transcript), inboxes_(graph.n()) {}

  void begin_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }
  long rounds() const { return round_; }
  const net::WeightedGraph& graph() const { return *graph_; }
  const Transcript& transcript() const { return transcript_; }

  // Delivers one synchronous round. Messages may only follow graph edges;
  // delivery is atomic at the round barrier and the transcript is appended
  // in (sender, receiver) order. An empty round is a no-op.
  void exchange(std::vector<Message> messages) {
    if (messages.empty()) return;
    for (const auto& m : messages) {
      if (m.sender < 0 || m.receiver < 0 || m.sender >= graph_->n() ||
          m.receiver >= graph_->n() || !graph_->has_edge(m.sender, m.receiver)) {
        throw TopologyError("network: payload for missing edge " +
                            std::to_string(m.sender) + "->" + std::to_string(m.receiver));
      }
    }
    std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
      return a.sender != b.sender ? a.sender < b.sender : a.receiver < b.receiver;
    });
    for (auto& box : inboxes_) box.clear();
    for (auto& m : messages) {
      if (record_)
        transcript_.append(TranscriptRecord{round_, m.sender, m.receiver, phase_, m.payload});
      inboxes_[m.receiver].push_back(std::move(m));
    }
    ++round_;
  }

  // Messages delivered to `agent` in the most recent round.
  const std::vector<Message>& inbox(int agent) const { return inboxes_.at(agent); }

 private:
  const net::WeightedGraph* graph_;
  bool record_;
  Phase phase_ = Phase::shuffle;
  long round_ = 0;
  Transcript transcript_;
  std::vector<std::vector<Message>> inboxes_;
};

}  // namespace dpac::sim

#endif  // DPAC_SIMNET_HPP
