#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "mobsched/adapter.hpp"

using namespace mobsched;

namespace {

const std::string kEcho = ADAPTER_ECHO_PATH;

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> vals) {
    std::vector<std::uint8_t> out;
    for (int v : vals) out.push_back(static_cast<std::uint8_t>(v));
    return out;
}

}  // namespace

TEST_CASE("the harness protocol round-trips execution records") {
    AdapterProcess adapter(kEcho);
    REQUIRE(adapter.command() == kEcho);

    const ExecutionRecord rec = adapter.execute_once(bytes_of({0x41, 0x42}));
    REQUIRE(rec.exec_cost_us == 12);
    REQUIRE(rec.stack_bytes == 100 + (0x41 + 0x42) % 1000);
    REQUIRE(rec.cmp_matched == 1);  // one 0x41 byte
    REQUIRE(rec.edges == std::vector<std::uint32_t>{1, 256 + 0x41, 256 + 0x42});

    const ExecutionRecord empty = adapter.execute_once({});
    REQUIRE(empty.exec_cost_us == 10);
    REQUIRE(empty.edges == std::vector<std::uint32_t>{1});

    // repeated byte collapses to one edge
    const ExecutionRecord rep = adapter.execute_once(bytes_of({7, 7, 7}));
    REQUIRE(rep.edges == std::vector<std::uint32_t>{1, 256 + 7});
    REQUIRE(rep.exec_cost_us == 13);
}

TEST_CASE("a malformed reply is a recoverable error") {
    AdapterProcess adapter(kEcho + " --malformed-once");
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({1})), AdapterError);
    const ExecutionRecord rec = adapter.execute_once(bytes_of({1}));
    REQUIRE(rec.exec_cost_us == 11);
}

TEST_CASE("replies claiming out-of-map edges are rejected") {
    AdapterProcess adapter(kEcho + " --overclaim");
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({1})), AdapterError);
}

TEST_CASE("a dead harness raises the unrecoverable error") {
    AdapterProcess adapter(kEcho + " --die-after 2");
    adapter.execute_once(bytes_of({1}));
    adapter.execute_once(bytes_of({2}));
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({3})), AdapterDead);
    // the process is gone for good
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({4})), AdapterDead);
}

TEST_CASE("an immediately dying harness is detected on first use") {
    AdapterProcess adapter(kEcho + " --die-after 0");
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({1})), AdapterDead);
}

TEST_CASE("a silent harness times out as a recoverable error") {
    AdapterProcess adapter(kEcho + " --hang", 150);
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({1})), AdapterError);
}

TEST_CASE("a command that cannot start surfaces as a dead harness") {
    AdapterProcess adapter("/no/such/binary-here");
    REQUIRE_THROWS_AS(adapter.execute_once(bytes_of({1})), AdapterDead);
}
