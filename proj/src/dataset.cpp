#include "ifa/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ifa/errors.hpp"

namespace ifa {

namespace {

using nlohmann::json;

json ids_to_json(const std::vector<std::int32_t>& ids) { return json(ids); }

std::vector<std::int32_t> ids_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw DataError(std::string("field '") + field + "': expected an array");
  std::vector<std::int32_t> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw DataError(std::string("field '") + field + "': expected integer ids");
    out.push_back(v.get<std::int32_t>());
  }
  return out;
}

std::uint8_t label_from_json(const json& j, const char* field) {
  if (!j.is_number_integer())
    throw DataError(std::string("field '") + field + "': expected 0 or 1");
  const int v = j.get<int>();
  if (v != 0 && v != 1)
    throw DataError(std::string("field '") + field + "': expected 0 or 1");
  return static_cast<std::uint8_t>(v);
}

}  // namespace

std::string request_to_json_line(const Request& req) {
  json j;
  j["user"] = ids_to_json(req.user_feats);
  json cands = json::array();
  for (const CandidateItem& c : req.candidates) {
    json jc;
    jc["f"] = ids_to_json(c.item_feats);
    jc["x"] = ids_to_json(c.cross_feats);
    jc["imp"] = static_cast<int>(c.label_imp);
    jc["cli"] = static_cast<int>(c.label_cli);
    if (req.has_extra_labels) jc["lv"] = static_cast<int>(c.label_extra);
    cands.push_back(std::move(jc));
  }
  j["cands"] = std::move(cands);
  json seq = json::array();
  for (const SeqItem& s : req.sequence) {
    json js;
    js["f"] = ids_to_json(s.item_feats);
    js["c"] = s.category;
    seq.push_back(std::move(js));
  }
  j["seq"] = std::move(seq);
  return j.dump();
}

Request request_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid json: ") + e.what());
  }
  if (!j.is_object()) throw DataError("expected a json object");
  if (!j.contains("user") || !j.contains("cands") || !j.contains("seq"))
    throw DataError("missing one of the required fields 'user', 'cands', 'seq'");

  Request req;
  req.user_feats = ids_from_json(j["user"], "user");

  const json& cands = j["cands"];
  if (!cands.is_array() || cands.empty())
    throw DataError("field 'cands': expected a non-empty array");
  for (const auto& jc : cands) {
    if (!jc.is_object() || !jc.contains("f") || !jc.contains("x") || !jc.contains("imp") ||
        !jc.contains("cli"))
      throw DataError("field 'cands': each entry needs 'f', 'x', 'imp', 'cli'");
    CandidateItem c;
    c.item_feats = ids_from_json(jc["f"], "cands.f");
    c.cross_feats = ids_from_json(jc["x"], "cands.x");
    c.label_imp = label_from_json(jc["imp"], "cands.imp");
    c.label_cli = label_from_json(jc["cli"], "cands.cli");
    if (jc.contains("lv")) {
      c.label_extra = label_from_json(jc["lv"], "cands.lv");
      req.has_extra_labels = true;
    }
    req.candidates.push_back(std::move(c));
  }

  const json& seq = j["seq"];
  if (!seq.is_array()) throw DataError("field 'seq': expected an array");
  for (const auto& js : seq) {
    if (!js.is_object() || !js.contains("f") || !js.contains("c"))
      throw DataError("field 'seq': each entry needs 'f' and 'c'");
    SeqItem s;
    s.item_feats = ids_from_json(js["f"], "seq.f");
    if (!js["c"].is_number_integer()) throw DataError("field 'seq.c': expected an integer");
    s.category = js["c"].get<std::int32_t>();
    req.sequence.push_back(std::move(s));
  }

  req.validate();
  return req;
}

void append_dataset(std::ostream& os, const Request& req) {
  os << request_to_json_line(req) << '\n';
}

void write_dataset(const std::string& path, std::span<const Request> requests) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("dataset: cannot open '" + path + "' for writing");
  for (const Request& r : requests) append_dataset(os, r);
  if (!os) throw IoError("dataset: write failed for '" + path + "'");
}

std::vector<Request> read_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("dataset: cannot open '" + path + "'");
  std::vector<Request> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(request_from_json_line(line));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ifa
