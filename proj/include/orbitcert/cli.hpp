#pragma once

namespace orbitcert {
int run_cli(int argc, char** argv);
}
