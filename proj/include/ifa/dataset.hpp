#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ifa/request.hpp"

namespace ifa {

// Line-delimited JSON, one request per line:
//   {"user":[...],
//    "cands":[{"f":[id,cat,topic],"x":[...],"imp":0,"cli":0(,"lv":0)},...],
//    "seq":[{"f":[id,cat,topic],"c":cat},...]}
// Self-describing, stream-friendly, diff-able.

std::string request_to_json_line(const Request& req);
Request request_from_json_line(const std::string& line);  // throws DataError

void write_dataset(const std::string& path, std::span<const Request> requests);
void append_dataset(std::ostream& os, const Request& req);

// Reads every line; errors cite the 1-based line number and offending field.
std::vector<Request> read_dataset(const std::string& path);

}  // namespace ifa
