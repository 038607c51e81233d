// Regenerates the color-name lookup table file (little-endian float32,
// 32768 x 11, row-major) from the builtin prototype-based fallback.
#include <cstdio>

#include "cotrack/features.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: make_cn_table <out.bin>\n");
        return 2;
    }
    cotrack::CNLookupTable::builtin().save(argv[1]);
    std::printf("wrote %s\n", argv[1]);
    return 0;
}
