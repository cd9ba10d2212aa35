// Runs the full acceptance battery and exits nonzero if any criterion fails.
#include <iostream>

#include "dsm/suite.hpp"

int main() { return dsm::cli_suite(dsm::SuiteOptions{}, std::cout); }
