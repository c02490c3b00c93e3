#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ycbench/model.hpp"

namespace ycbench {

inline constexpr std::string_view kSnapshotSchema = "yc-bench/snapshot/v1";

class SnapshotError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const LedgerEntry& e);
nlohmann::json to_json(const DigestEvent& e);
nlohmann::json to_json(const SimEvent& e);
nlohmann::json to_json(const TaskRecord& t);
nlohmann::json to_json(const EmployeeProfile& e);
/// Includes the hidden fields; only for privileged snapshots.
nlohmann::json to_json(const ClientProfile& c);
nlohmann::json to_json(const WorldState& s);

WorldState state_from_json(const nlohmann::json& j);

/// Canonical text of the state: sorted keys, fixed indentation.
std::string snapshot_text(const WorldState& s);
/// SHA-256 (hex) of snapshot_text.
std::string snapshot_hash(const WorldState& s);

/// Self-describing snapshot file: schema tag, checksum, optional session
/// metadata and the state. The checksum covers the metadata and the state text.
std::string snapshot_file_text(const WorldState& s, const nlohmann::json& session_meta = nlohmann::json::object());
/// Parses and verifies a snapshot file. Throws SnapshotError on schema or checksum mismatch.
WorldState parse_snapshot_file(std::string_view text, nlohmann::json* session_meta = nullptr);

std::string sha256_hex(std::string_view data);

}  // namespace ycbench
