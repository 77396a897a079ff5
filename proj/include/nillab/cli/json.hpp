#pragma once

#include <json.hpp>

namespace nillab::cli {

/// Objects keep insertion order, so emitted keys are in a fixed order.
using json = nlohmann::ordered_json;

}  // namespace nillab::cli
