#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biphoton/quantum.hpp"

namespace biphoton::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3 };

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

struct SweepPoint {
    double theta = 0;
    double chsh_S = 0;
    double noncr = 0;
};

/// a1 = sx, b1 = sz, a2 = cos(t) sx - sin(t) sz, b2 = cos(t) sx + sin(t) sz.
MeasurementSettings sweep_settings(double theta);
SweepPoint sweep_point(double theta);
/// `points` evenly spaced angles from `from` to `to` inclusive; one point sits at `from`.
std::vector<SweepPoint> sweep(double from, double to, std::size_t points);

/// Fixed 9-decimal rendering used by every numeric output.
std::string fixed9(double x);
/// RFC 4180 field quoting.
std::string csv_field(const std::string &s);

}  // namespace biphoton::cli
