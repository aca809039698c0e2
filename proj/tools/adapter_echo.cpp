// Reference harness for the stdio execution protocol. Deliberately written
// against the wire format only, with no scheduler headers, so protocol tests
// exercise a second, independent implementation. Fault flags simulate the
// misbehaving harnesses the runner has to survive.

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <set>
#include <string>
#include <vector>

namespace {

bool read_exact(std::uint8_t* buf, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = read(STDIN_FILENO, buf + got, n - got);
        if (r <= 0) return false;
        got += static_cast<std::size_t>(r);
    }
    return true;
}

void reply_line(const std::string& line) {
    std::string out = line + "\n";
    std::size_t sent = 0;
    while (sent < out.size()) {
        const ssize_t w = write(STDOUT_FILENO, out.data() + sent, out.size() - sent);
        if (w <= 0) return;
        sent += static_cast<std::size_t>(w);
    }
}

std::string run_input(const std::vector<std::uint8_t>& input, bool overclaim) {
    std::set<unsigned> edges;
    edges.insert(1);
    for (std::size_t i = 0; i < input.size() && i < 8; ++i)
        edges.insert(256u + input[i]);
    if (overclaim) edges.insert(70000);

    unsigned long long sum = 0;
    unsigned cmp = 0;
    for (std::uint8_t b : input) {
        sum += b;
        if (b == 0x41) ++cmp;
    }

    std::string js = "{\"edges\":[";
    bool first = true;
    for (unsigned e : edges) {
        if (!first) js += ",";
        js += std::to_string(e);
        first = false;
    }
    js += "],\"exec_cost_us\":" + std::to_string(10 + input.size());
    js += ",\"stack_bytes\":" + std::to_string(100 + sum % 1000);
    js += ",\"cmp_matched\":" + std::to_string(cmp);
    js += "}";
    return js;
}

}  // namespace

int main(int argc, char** argv) {
    bool malformed_once = false, overclaim = false, hang = false;
    long die_after = -1;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--malformed-once")) malformed_once = true;
        if (!std::strcmp(argv[i], "--overclaim")) overclaim = true;
        if (!std::strcmp(argv[i], "--hang")) hang = true;
        if (!std::strcmp(argv[i], "--die-after") && i + 1 < argc)
            die_after = std::strtol(argv[++i], nullptr, 10);
    }

    long handled = 0;
    for (;;) {
        std::uint8_t len_buf[4];
        if (!read_exact(len_buf, 4)) return 0;
        const std::uint32_t len = static_cast<std::uint32_t>(len_buf[0]) |
                                  (static_cast<std::uint32_t>(len_buf[1]) << 8) |
                                  (static_cast<std::uint32_t>(len_buf[2]) << 16) |
                                  (static_cast<std::uint32_t>(len_buf[3]) << 24);
        std::vector<std::uint8_t> input(len);
        if (len > 0 && !read_exact(input.data(), len)) return 0;

        if (die_after >= 0 && handled >= die_after) return 1;
        if (hang) {
            sleep(3600);
            return 0;
        }
        if (malformed_once && handled == 0) {
            reply_line("this is not a protocol reply");
            ++handled;
            continue;
        }
        reply_line(run_input(input, overclaim));
        ++handled;
    }
}
