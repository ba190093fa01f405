#pragma once

#include <string>
#include <string_view>

namespace colm::metrics {

// Porter's suffix-stripping stemmer, following the widely distributed
// reference implementation (including its "bli"->"ble" and "logi"->"log"
// departures from the 1980 description). Expects a lowercase word; words of
// two letters or fewer are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace colm::metrics
