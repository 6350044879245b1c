#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tattooed/errors.hpp"
#include "tattooed/watermark.hpp"

namespace tattooed {

namespace {
constexpr int kRecordVersion = 1;
}

std::string record_to_json(const MarkRecord& r) {
  nlohmann::json j = {
      {"version", kRecordVersion},
      {"key_id", r.key_id},
      {"baseline_ref", {{"path", r.baseline.path}, {"sha256", r.baseline.sha256}}},
      {"payload_hex", to_hex(r.payload.bytes)},
      {"payload_bits", r.payload.bit_length()},
      {"gamma", r.gamma},
      {"ratio", r.ratio},
      {"spread_bits", r.spread_bits},
      {"parameter_count", r.parameter_count},
      {"created_at", r.created_at},
  };
  return j.dump(2) + "\n";
}

MarkRecord record_from_json(std::string_view text) {
  MarkRecord r;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != kRecordVersion) {
      throw RecordError("unsupported mark record version");
    }
    r.key_id = j.at("key_id").get<std::string>();
    r.baseline.path = j.at("baseline_ref").at("path").get<std::string>();
    r.baseline.sha256 = j.at("baseline_ref").at("sha256").get<std::string>();
    const auto hex = j.at("payload_hex").get<std::string>();
    r.payload.bytes.resize(hex.size() / 2);
    if (hex.size() % 2 != 0 || !from_hex(hex, r.payload.bytes)) {
      throw RecordError("payload_hex is not valid hex");
    }
    if (j.at("payload_bits").get<std::size_t>() != r.payload.bit_length()) {
      throw RecordError("payload_bits disagrees with payload_hex");
    }
    r.gamma = j.at("gamma").get<double>();
    r.ratio = j.at("ratio").get<double>();
    r.spread_bits = j.at("spread_bits").get<std::size_t>();
    r.parameter_count = j.at("parameter_count").get<std::size_t>();
    r.created_at = j.at("created_at").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw RecordError(std::string("malformed mark record: ") + ex.what());
  }
  if (r.payload.bytes.empty()) throw RecordError("mark record has an empty payload");
  if (r.spread_bits != spread_bit_count(r.payload.bit_length())) {
    throw RecordError("spread_bits must equal 200 + 2 * payload_bits");
  }
  return r;
}

void save_record(const MarkRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RecordError("cannot write " + path.string());
  out << record_to_json(record);
}

MarkRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RecordError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return record_from_json(ss.str());
}

}  // namespace tattooed
