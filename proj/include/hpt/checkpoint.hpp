#pragma once

#include <string>

#include "hpt/models.hpp"

#include <json.hpp>

namespace hpt {

// Binary checkpoint: 4-byte magic, u32 little-endian JSON header length, the
// JSON header, then every parameter as raw 64-bit doubles in declaration
// order. Raw bytes keep save -> load -> save bit-identical.
inline constexpr char kCheckpointMagic[4] = {'H', 'P', 'T', 'C'};

void save_checkpoint(const std::string& path, const CompositeModel& m,
                     const nlohmann::json& meta = {});
void save_checkpoint(const std::string& path, const PlainModel& m,
                     const nlohmann::json& meta = {});

// Reads just the JSON header (for inspection tools).
nlohmann::json checkpoint_header(const std::string& path);

CompositeModel load_composite(const std::string& path, const AdamConfig& adam,
                              nlohmann::json* meta = nullptr);
PlainModel load_plain(const std::string& path, const AdamConfig& adam,
                      nlohmann::json* meta = nullptr);

}  // namespace hpt
