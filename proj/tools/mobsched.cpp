#include <string>
#include <vector>

#include <mobsched/cli.hpp>

int main(int argc, char** argv) {
    return mobsched::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
