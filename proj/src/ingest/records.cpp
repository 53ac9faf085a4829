#include <fstream>

#include <json.hpp>

#include "ookgate/error.hpp"
#include "ookgate/ingest.hpp"

namespace ookgate {

std::vector<TextRecord> read_jsonl_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::vector<TextRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      TextRecord r;
      const auto& id = j.at("id");
      r.id = id.is_string() ? id.get<std::string>() : id.dump();
      r.text = j.at("text").get<std::string>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, where + ": " + e.what());
    }
  }
  return records;
}

void write_jsonl_records(const std::filesystem::path& path, std::span<const TextRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace ookgate
