#pragma once

#include <string>
#include <vector>

#include "ifslab/mapkit.hpp"

namespace ifslab::specio {

// Parses and validates an IFS spec document (JSON schema v1, see
// docs/formats.md). Schema errors carry JSON-pointer style paths.
IFSystem ifs_from_json(const std::string &text);
IFSystem load_ifs(const std::string &path);
std::string ifs_to_json(const IFSystem &ifs); // canonical form

} // namespace ifslab::specio

namespace ifslab::gallery {

struct Entry {
    std::string id;
    std::string description;
    const char *json;
};

const std::vector<Entry> &entries();
const Entry &find(const std::string &id);
IFSystem load(const std::string &id);

} // namespace ifslab::gallery
