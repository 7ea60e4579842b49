/*
 * Copyright 2026 The FedDCL Authors.
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

#include <bit>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "feddcl/nnet/checkpoint.hpp"
#include "feddcl/numkit/matrix.hpp"

namespace feddcl::protocol {

using numkit::Mat;

enum class Role : std::uint8_t { kUser, kGroupServer, kCentralServer };

/// A protocol participant. Users are (group, institution); group servers
/// carry only the group index; the central server carries neither.
struct Party {
  Role role = Role::kUser;
  std::size_t group = 0;
  std::size_t institution = 0;

  static Party user(std::size_t i, std::size_t j) { return {Role::kUser, i, j}; }
  static Party group_server(std::size_t i) { return {Role::kGroupServer, i, 0}; }
  static Party central() { return {Role::kCentralServer, 0, 0}; }

  bool is_user() const noexcept { return role == Role::kUser; }
  auto key() const noexcept { return std::tuple(static_cast<int>(role), group, institution); }
  bool operator==(const Party& o) const noexcept { return key() == o.key(); }
  bool operator<(const Party& o) const noexcept { return key() < o.key(); }
};

/// 1-based labels, matching the (i, j) convention of user indices.
inline std::string to_string(const Party& p) {
  switch (p.role) {
    case Role::kUser:
      return "user(" + std::to_string(p.group + 1) + "," + std::to_string(p.institution + 1) + ")";
    case Role::kGroupServer:
      return "dc(" + std::to_string(p.group + 1) + ")";
    case Role::kCentralServer:
      break;
  }
  return "central";
}

enum class PayloadKind : std::uint8_t {
  kXTilde,
  kATilde,
  kTargets,
  kGroupBasis,
  kCollabTarget,
  kAlignment,
  kModel,
  kSampleCount,
  // Never allowed on the bus; listed so audits can name them.
  kRawData,
  kMappingFunction,
  kMean,
};

inline std::string to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::kXTilde: return "x_tilde";
    case PayloadKind::kATilde: return "a_tilde";
    case PayloadKind::kTargets: return "y";
    case PayloadKind::kGroupBasis: return "b_tilde";
    case PayloadKind::kCollabTarget: return "z";
    case PayloadKind::kAlignment: return "g";
    case PayloadKind::kModel: return "model";
    case PayloadKind::kSampleCount: return "sample_count";
    case PayloadKind::kRawData: return "raw_data";
    case PayloadKind::kMappingFunction: return "mapping_function";
    case PayloadKind::kMean: return "mean";
  }
  return "unknown";
}

inline bool is_forbidden(PayloadKind k) noexcept {
  return k == PayloadKind::kRawData || k == PayloadKind::kMappingFunction || k == PayloadKind::kMean;
}

/// One serialized part of a message.
struct Payload {
  PayloadKind kind;
  std::string bytes;
};

inline std::string encode_mat(const Mat& m) {
  std::string out;
  out.reserve(16 + 8 * m.size());
  auto put = [&out](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put(m.rows());
  put(m.cols());
  for (double v : m.data()) put(std::bit_cast<std::uint64_t>(v));
  return out;
}

inline Mat decode_mat(const std::string& b) {
  auto get = [&b](std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= std::uint64_t{static_cast<unsigned char>(b[at + static_cast<std::size_t>(i)])} << (8 * i);
    return v;
  };
  if (b.size() < 16) throw FormatError("decode_mat: short buffer");
  const auto r = get(0), c = get(8);
  if (b.size() != 16 + 8 * r * c) throw FormatError("decode_mat: length does not match shape");
  Mat m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = std::bit_cast<double>(get(16 + 8 * i));
  return m;
}

inline Payload mat_payload(PayloadKind k, const Mat& m) { return {k, encode_mat(m)}; }
inline Payload model_payload(const nnet::MlpModel& m) { return {PayloadKind::kModel, nnet::serialize_model(m)}; }
inline Payload count_payload(std::size_t n) {
  return mat_payload(PayloadKind::kSampleCount, Mat(1, 1, static_cast<double>(n)));
}

struct Message {
  std::string step;
  Party sender;
  Party receiver;
  std::vector<Payload> parts;

  std::size_t bytes() const {
    std::size_t n = 0;
    for (const auto& p : parts) n += 1 + p.bytes.size();
    return n;
  }

  const Payload& part(PayloadKind k) const {
    for (const auto& p : parts)
      if (p.kind == k) return p;
    throw PreconditionError("message '" + step + "' from " + to_string(sender) + " has no " + to_string(k));
  }
  Mat mat(PayloadKind k) const { return decode_mat(part(k).bytes); }
  nnet::MlpModel model() const { return nnet::deserialize_model(part(PayloadKind::kModel).bytes); }
};

enum class EdgeClass : std::uint8_t { kCrossInstitutional, kServerTier };

inline std::string to_string(EdgeClass e) {
  return e == EdgeClass::kCrossInstitutional ? "cross_institutional" : "server_tier";
}

/// Any edge touching a user institution is cross-institutional; the rest
/// run between servers.
inline EdgeClass classify(const Party& a, const Party& b) noexcept {
  return (a.is_user() || b.is_user()) ? EdgeClass::kCrossInstitutional : EdgeClass::kServerTier;
}

struct LedgerRecord {
  std::size_t seq = 0;
  std::string step;
  Party sender;
  Party receiver;
  std::vector<PayloadKind> kinds;
  std::size_t bytes = 0;
  EdgeClass edge = EdgeClass::kServerTier;

  std::string kind_label() const {
    std::string s;
    for (std::size_t k = 0; k < kinds.size(); ++k) s += (k ? "+" : "") + to_string(kinds[k]);
    return s;
  }
};

struct EdgeSummary {
  std::size_t messages = 0;
  std::size_t bytes = 0;
};

class CommLedger {
 public:
  void record(const Message& m) {
    LedgerRecord r{records_.size(), m.step, m.sender, m.receiver, {}, m.bytes(), classify(m.sender, m.receiver)};
    for (const auto& p : m.parts) r.kinds.push_back(p.kind);
    records_.push_back(std::move(r));
  }

  const std::vector<LedgerRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Cross-institutional records with `user` as sender or receiver.
  std::size_t cross_institutional_count(const Party& user) const {
    std::size_t n = 0;
    for (const auto& r : records_)
      if (r.edge == EdgeClass::kCrossInstitutional && (r.sender == user || r.receiver == user)) ++n;
    return n;
  }

  std::map<EdgeClass, EdgeSummary> summary() const {
    std::map<EdgeClass, EdgeSummary> s{{EdgeClass::kCrossInstitutional, {}}, {EdgeClass::kServerTier, {}}};
    for (const auto& r : records_) {
      s[r.edge].messages += 1;
      s[r.edge].bytes += r.bytes;
    }
    return s;
  }

  /// Problems with the two-message contract for `users`: each must have one
  /// upload and one download, users may only send {x_tilde, a_tilde, y},
  /// and forbidden kinds must never appear. Empty means compliant.
  std::vector<std::string> audit(const std::vector<Party>& users) const {
    std::vector<std::string> issues;
    for (const auto& u : users) {
      std::size_t up = 0, down = 0;
      for (const auto& r : records_) {
        if (r.sender == u) ++up;
        if (r.receiver == u) ++down;
      }
      if (up != 1 || down != 1)
        issues.push_back(to_string(u) + ": " + std::to_string(up) + " uploads and " + std::to_string(down) +
                         " downloads");
    }
    for (const auto& r : records_)
      for (auto k : r.kinds) {
        if (is_forbidden(k)) issues.push_back("record " + std::to_string(r.seq) + " carries " + to_string(k));
        if (r.sender.is_user() && k != PayloadKind::kXTilde && k != PayloadKind::kATilde &&
            k != PayloadKind::kTargets)
          issues.push_back("record " + std::to_string(r.seq) + ": user sends " + to_string(k));
      }
    return issues;
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("CommLedger: cannot write '" + path + "'");
    out << "seq,step,sender,receiver,kind,bytes,edge\n";
    for (const auto& r : records_)
      out << r.seq << ',' << r.step << ',' << to_string(r.sender) << ',' << to_string(r.receiver) << ','
          << r.kind_label() << ',' << r.bytes << ',' << to_string(r.edge) << '\n';
  }

 private:
  std::vector<LedgerRecord> records_;
};

/// In-process transport. Every message is stored in serialized form, logged
/// to the ledger on send, and queued for its receiver.
class MessageBus {
 public:
  explicit MessageBus(CommLedger& ledger) : ledger_(ledger) {}

  void send(Message m) {
    for (const auto& p : m.parts)
      if (is_forbidden(p.kind))
        throw PreconditionError("MessageBus: " + to_string(m.sender) + " tried to send " + to_string(p.kind));
    ledger_.record(m);
    inbox_[m.receiver].push_back(std::move(m));
  }

  /// Next message for `who`; the step label must match.
  Message receive(const Party& who, const std::string& step) {
    auto& q = inbox_[who];
    if (q.empty()) throw PreconditionError("MessageBus: no message for " + to_string(who) + " at " + step);
    Message m = std::move(q.front());
    q.pop_front();
    if (m.step != step)
      throw PreconditionError("MessageBus: " + to_string(who) + " expected '" + step + "' but got '" + m.step +
                              "'");
    return m;
  }

  std::size_t pending(const Party& who) const {
    auto it = inbox_.find(who);
    return it == inbox_.end() ? 0 : it->second.size();
  }

  CommLedger& ledger() noexcept { return ledger_; }

 private:
  CommLedger& ledger_;
  std::map<Party, std::deque<Message>> inbox_;
};

}  // namespace feddcl::protocol
