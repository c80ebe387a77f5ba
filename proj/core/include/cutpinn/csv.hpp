#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace cutpinn::io {

// 17-significant-digit decimal, the round-trip precision for binary64.
std::string format_full(double v);

// Minimal CSV writer with a fixed header. Numeric fields are written in
// full precision so files are byte-reproducible from a manifest.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<std::string>& fields);
  std::ofstream& stream() { return out_; }

 private:
  std::ofstream out_;
};

// Flat key = value manifest written beside every experiment CSV.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace cutpinn::io
