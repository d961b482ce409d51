#pragma once

#include <cstdint>
#include <string_view>

namespace pprl {

enum class Role : std::uint8_t { P0 = 0, P1 = 1, Helper = 2, DataOwner = 3, QueryClient = 4 };

inline constexpr bool is_party(Role r) { return r == Role::P0 || r == Role::P1 || r == Role::Helper; }
inline constexpr bool is_proxy(Role r) { return r == Role::P0 || r == Role::P1; }

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

}  // namespace pprl
