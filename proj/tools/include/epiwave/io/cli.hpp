#pragma once

#include <iostream>

namespace epiwave::io {

// epiwave run|sweep|compare|validate --config FILE [--tau X] [--out DIR]
//         [--taus LIST] [--q1 Q] [--q2 Q]
// Returns 0 on success, 1 on solver errors and 2 on usage or config errors.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace epiwave::io
