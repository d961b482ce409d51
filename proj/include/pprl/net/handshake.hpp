#pragma once

#include "pprl/net/frame.hpp"
#include "pprl/role.hpp"

namespace pprl::net {

/// Dialing side: sends our HELLO and checks the reply. Throws ProtocolError
/// on a version or digest mismatch, a wrong peer role, or an ABORT reply.
Hello hello_dial(int fd, Role self, const Digest& digest, Role expected_peer);

/// Accepting side: reads the HELLO, checks it and replies with ours (or with
/// ABORT and the reason, then throws).
Hello hello_accept(int fd, Role self, const Digest& digest);

}  // namespace pprl::net
