#pragma once

#include <span>
#include <string>
#include <string_view>

namespace ctxk {

// Path globs used by access and freshness rules.
//
//  - '*' matches any run of characters inside one '/'-separated segment.
//  - The pattern consisting of a single "*" is universal and matches every path.
//  - "${assigned}" is substituted with each value of the session's assigned
//    scope; the path matches if any substitution matches. With an empty scope
//    such patterns match nothing.
//  - "**", empty segments, leading '/' and other "${...}" variables are invalid.
bool valid_glob(std::string_view pattern, std::string* why = nullptr);

bool glob_match(std::string_view pattern, std::string_view path,
                std::span<const std::string> assigned = {});

bool glob_uses_assigned(std::string_view pattern);

}  // namespace ctxk
