#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lsfkit::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

struct Figure4Row {
    double p = 0;
    double entropy = 0;
    double rReal = 0;
    uint32_t rInt = 0;
    double spaceReal = 0;
    double spaceInt = 0;
    double overheadReal = 0;
    double overheadInt = 0;
};

/// Grid p_i = 0.5 * i / points for i = 1..points.
std::vector<Figure4Row> figure4(size_t points = 1000);

struct Figure4Peak {
    double overhead = 0;
    double p = 0;
};
Figure4Peak peakInt(const std::vector<Figure4Row> &rows);
Figure4Peak peakReal(const std::vector<Figure4Row> &rows);

void writeFigure4Csv(std::ostream &out, const std::vector<Figure4Row> &rows);

} // namespace lsfkit::cli
