#ifndef WEB3DB_GOSSIP_HPP
#define WEB3DB_GOSSIP_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"

namespace web3db::gossip {

struct GossipMessage {
    Digest256 msg_id;  // digest(payload || origin pk || round)
    PublicKey origin_pk;
    Bytes payload;
    std::uint64_t round = 0;
    Signature signature;  // over (msg_id || payload)
    std::uint32_t hop_count = 0;
};

struct NetworkTopology {
    std::vector<PublicKey> nodes;
    std::vector<std::vector<std::uint32_t>> chosen_peers;  // per node, exactly fanout picks
    // Symmetric closure of the peer choices: gossip channels are
    // bidirectional, so messages flow both ways along an edge.
    std::vector<std::vector<std::uint32_t>> neighbors;
    std::uint32_t fanout = 0;

    std::uint32_t index_of(const PublicKey& pk) const;  // throws NotFoundError
    bool union_connected() const;
};

// Each node picks `fanout` distinct random peers (no self-loops). The same
// rng seed always reproduces the same topology.
NetworkTopology build_network(const std::vector<PublicKey>& node_pks, std::uint32_t fanout,
                              ByteView rng_seed);

// Re-rolls with derived seeds until the union graph is connected.
NetworkTopology build_connected_network(const std::vector<PublicKey>& node_pks,
                                        std::uint32_t fanout, ByteView rng_seed,
                                        std::uint32_t max_attempts = 64);

GossipMessage make_message(const SecretKey& origin_sk, ByteView payload, std::uint64_t round);
bool verify_message(const GossipMessage& msg);

struct NodeDelivery {
    int first_hop = -1;  // -1 while undelivered
    std::uint32_t rejected_count = 0;
};

struct DeliveryTrace {
    std::vector<NodeDelivery> per_node;
    std::vector<std::pair<std::uint32_t, Digest256>> forwards;  // (node, msg) forwarding log
    std::size_t delivered_count() const;
    std::string to_json(const NetworkTopology& topology) const;
};

// Synchronous hop-by-hop gossip simulation. Nodes verify signatures before
// forwarding, forward new messages only, and keep verified payloads in a
// per-node inbox until cleared.
class GossipNetwork {
public:
    explicit GossipNetwork(NetworkTopology topology, double drop_probability = 0.0,
                           ByteView drop_seed = {});

    DeliveryTrace broadcast(const SecretKey& origin_sk, ByteView payload, std::uint64_t round);

    // Hands an externally crafted message to one node, as if it arrived
    // mid-flight; propagation then follows the normal rules.
    DeliveryTrace inject(const PublicKey& at_node, const GossipMessage& msg);

    std::vector<Bytes> deliver_inbox(const PublicKey& node) const;  // ordered by msg_id
    void clear_inboxes();

    const NetworkTopology& topology() const { return topology_; }

private:
    DeliveryTrace propagate(std::uint32_t entry, const GossipMessage& msg);

    NetworkTopology topology_;
    double drop_probability_;
    Bytes drop_seed_;
    std::uint64_t drop_counter_ = 0;
    std::vector<std::map<Digest256, Bytes>> inboxes_;
};

}  // namespace web3db::gossip

#endif
