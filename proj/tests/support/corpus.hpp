#pragma once

#include <cstdint>
#include <string>

#include "tabgls/codec.hpp"

namespace testsupport {

std::string corpus_line(const tabgls::TableText& t, const std::string& image, const std::string& source,
                        const std::string& query = "Recognize the table.");

// n manifest lines of random tables. The default alternates HTML and LaTeX;
// mixed cycles through all four formats, keeping markdown tables span-free.
std::string random_corpus(std::size_t n, std::uint64_t seed, int max_dim = 5, bool mixed = false);

}  // namespace testsupport
