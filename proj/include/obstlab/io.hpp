#ifndef OBSTLAB_IO_HPP
#define OBSTLAB_IO_HPP

#include "obstlab/measure.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace obstlab {

// Line-oriented measure records, '#' starts a comment:
//
//   dimension 2
//   domain 0 0 1 1              lower corner, then upper corner
//   atom -1 0.5 0.5             mass, then coordinates
//   curve 0.3 0.1 0.1 0.9 0.9   linear density, then polyline vertices
//   density sine 1              prefix expression, see Density::serialize
//
// `dimension` and `domain` are optional (unit square by default) but must
// come before any charge.
Measure read_measure(std::istream& is);
Measure read_measure_file(const std::string& path);
void write_measure(std::ostream& os, const Measure& mu);

/// key=value lines, one per entry, in the given order.
using Summary = std::vector<std::pair<std::string, std::string>>;
void write_summary(std::ostream& os, const Summary& summary);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

} // namespace obstlab

#endif // OBSTLAB_IO_HPP
