// Regenerates the golden files under tests/data. Only needed after an
// intentional format change.
#include "golden.hpp"

#include <fstream>
#include <iostream>

namespace {

void write(const std::string &path, const std::vector<std::byte> &bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::cout << "wrote " << bytes.size() << " bytes to " << path << "\n";
}

} // namespace

int main(int argc, char **argv) {
    if (argc != 2) {
        std::cerr << "usage: make_golden <tests/data directory>\n";
        return 2;
    }
    const std::string dir = argv[1];
    write(dir + "/" + lsfkit::test::kGoldenLsfFile, lsfkit::test::goldenLsf().serialize());
    write(dir + "/" + lsfkit::test::kGoldenVlFile, lsfkit::test::goldenVl().serialize());
    return 0;
}
