#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace hpt {

// Append-only JSONL log: one object per line, flushed immediately so a
// crashed run still leaves every completed update on disk.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw std::runtime_error("metrics: cannot open " + path);
  }

  void write(const nlohmann::json& row) {
    out_ << row.dump() << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("metrics: write failed");
  }

 private:
  std::ofstream out_;
};

}  // namespace hpt
