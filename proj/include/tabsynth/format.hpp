#pragma once

#include <string>

namespace tabsynth {

// Shortest round-trip decimal form of a double ("%.17g" is the widest we
// need; trailing digits are trimmed by printf's %g). Used everywhere a real
// number lands in a report file so reruns are byte-identical.
std::string format_g17(double v);

// Like format_g17, but non-finite values become "+inf", "-inf" or "nan"
// instead of printf's platform-flavored spellings.
std::string format_metric(double v);

}  // namespace tabsynth
