#pragma once

#include <string>
#include <string_view>

namespace mscluster {

// Porter (1980) stemmer, following Martin Porter's reference C implementation
// including its two published departures (bli->ble, logi->log).
// Input is expected to be lower-case.
std::string porter_stem(std::string_view word);

// Snowball English ("Porter2") stemmer.
std::string snowball_stem(std::string_view word);

// Porter first; when Porter leaves the token unchanged and Snowball changes
// it, the Snowball form is used.
std::string stem_token(std::string_view word);

}  // namespace mscluster
