#include "web3db/gossip.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "json.hpp"
#include "web3db/rng.hpp"

namespace web3db::gossip {

std::uint32_t NetworkTopology::index_of(const PublicKey& pk) const {
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == pk) {
            return i;
        }
    }
    throw NotFoundError("node not in topology: " + pk.short_hex());
}

bool NetworkTopology::union_connected() const {
    if (nodes.empty()) {
        return false;
    }
    std::vector<bool> seen(nodes.size(), false);
    std::deque<std::uint32_t> queue{0};
    seen[0] = true;
    std::size_t visited = 1;
    while (!queue.empty()) {
        std::uint32_t cur = queue.front();
        queue.pop_front();
        for (std::uint32_t next : neighbors[cur]) {
            if (!seen[next]) {
                seen[next] = true;
                ++visited;
                queue.push_back(next);
            }
        }
    }
    return visited == nodes.size();
}

NetworkTopology build_network(const std::vector<PublicKey>& node_pks, std::uint32_t fanout,
                              ByteView rng_seed) {
    if (node_pks.size() < 2) {
        throw ArgumentError("gossip network needs at least 2 nodes");
    }
    if (fanout < 1 || fanout >= node_pks.size()) {
        throw ArgumentError("fanout must be in [1, node count)");
    }
    NetworkTopology topo;
    topo.nodes = node_pks;
    topo.fanout = fanout;
    topo.chosen_peers.resize(node_pks.size());

    DetRng rng(rng_seed);
    for (std::uint32_t i = 0; i < node_pks.size(); ++i) {
        // Sample fanout distinct peers excluding self: shuffle-prefix over
        // the candidate indices.
        std::vector<std::uint32_t> candidates;
        candidates.reserve(node_pks.size() - 1);
        for (std::uint32_t j = 0; j < node_pks.size(); ++j) {
            if (j != i) {
                candidates.push_back(j);
            }
        }
        for (std::uint32_t k = 0; k < fanout; ++k) {
            std::uint64_t pick = k + rng.next_below(candidates.size() - k);
            std::swap(candidates[k], candidates[pick]);
        }
        candidates.resize(fanout);
        std::sort(candidates.begin(), candidates.end());
        topo.chosen_peers[i] = std::move(candidates);
    }

    std::vector<std::set<std::uint32_t>> adjacency(node_pks.size());
    for (std::uint32_t i = 0; i < node_pks.size(); ++i) {
        for (std::uint32_t j : topo.chosen_peers[i]) {
            adjacency[i].insert(j);
            adjacency[j].insert(i);
        }
    }
    topo.neighbors.resize(node_pks.size());
    for (std::uint32_t i = 0; i < node_pks.size(); ++i) {
        topo.neighbors[i].assign(adjacency[i].begin(), adjacency[i].end());
    }
    return topo;
}

NetworkTopology build_connected_network(const std::vector<PublicKey>& node_pks,
                                        std::uint32_t fanout, ByteView rng_seed,
                                        std::uint32_t max_attempts) {
    for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
        Bytes seed(rng_seed.begin(), rng_seed.end());
        append_str(seed, "topology-attempt");
        append_u64_be(seed, attempt);
        NetworkTopology topo = build_network(node_pks, fanout, sha256(seed).bytes);
        if (topo.union_connected()) {
            return topo;
        }
    }
    throw ConfigError("could not build a connected gossip topology");
}

GossipMessage make_message(const SecretKey& origin_sk, ByteView payload, std::uint64_t round) {
    GossipMessage msg;
    msg.origin_pk = public_key_of(origin_sk);
    msg.payload.assign(payload.begin(), payload.end());
    msg.round = round;
    Bytes id_material = msg.payload;
    append_bytes(id_material, msg.origin_pk.bytes);
    append_u64_be(id_material, round);
    msg.msg_id = sha256(id_material);
    Bytes signed_material(msg.msg_id.bytes.begin(), msg.msg_id.bytes.end());
    append_bytes(signed_material, msg.payload);
    msg.signature = sign_detached(origin_sk, signed_material);
    return msg;
}

bool verify_message(const GossipMessage& msg) {
    Bytes id_material = msg.payload;
    append_bytes(id_material, msg.origin_pk.bytes);
    append_u64_be(id_material, msg.round);
    if (sha256(id_material) != msg.msg_id) {
        return false;
    }
    Bytes signed_material(msg.msg_id.bytes.begin(), msg.msg_id.bytes.end());
    append_bytes(signed_material, msg.payload);
    return verify_detached(msg.origin_pk, signed_material, msg.signature);
}

std::size_t DeliveryTrace::delivered_count() const {
    std::size_t n = 0;
    for (const NodeDelivery& d : per_node) {
        if (d.first_hop >= 0) {
            ++n;
        }
    }
    return n;
}

std::string DeliveryTrace::to_json(const NetworkTopology& topology) const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::uint32_t i = 0; i < per_node.size(); ++i) {
        out.push_back({{"node", topology.nodes[i].hex()},
                       {"first_hop", per_node[i].first_hop},
                       {"rejected_count", per_node[i].rejected_count}});
    }
    return out.dump();
}

GossipNetwork::GossipNetwork(NetworkTopology topology, double drop_probability,
                             ByteView drop_seed)
    : topology_(std::move(topology)),
      drop_probability_(drop_probability),
      drop_seed_(drop_seed.begin(), drop_seed.end()),
      inboxes_(topology_.nodes.size()) {
    if (drop_probability_ < 0.0 || drop_probability_ >= 1.0) {
        throw ArgumentError("drop probability must be in [0, 1)");
    }
}

DeliveryTrace GossipNetwork::broadcast(const SecretKey& origin_sk, ByteView payload,
                                       std::uint64_t round) {
    GossipMessage msg = make_message(origin_sk, payload, round);
    std::uint32_t origin = topology_.index_of(msg.origin_pk);
    return propagate(origin, msg);
}

DeliveryTrace GossipNetwork::inject(const PublicKey& at_node, const GossipMessage& msg) {
    return propagate(topology_.index_of(at_node), msg);
}

DeliveryTrace GossipNetwork::propagate(std::uint32_t entry, const GossipMessage& msg) {
    DeliveryTrace trace;
    trace.per_node.resize(topology_.nodes.size());

    auto edge_dropped = [&]() {
        if (drop_probability_ <= 0.0) {
            return false;
        }
        Bytes material = drop_seed_;
        append_str(material, "drop");
        append_u64_be(material, drop_counter_++);
        Digest256 d = sha256(material);
        std::uint64_t top = 0;
        for (int i = 0; i < 8; ++i) {
            top = (top << 8) | d.bytes[static_cast<std::size_t>(i)];
        }
        double unit = static_cast<double>(top >> 11) * 0x1.0p-53;
        return unit < drop_probability_;
    };

    // Entry node processes the message first; everything it forwards is
    // then delivered hop by hop.
    if (inboxes_[entry].count(msg.msg_id)) {
        return trace;  // duplicate: suppressed, nothing new to forward
    }
    if (!verify_message(msg)) {
        trace.per_node[entry].rejected_count += 1;
        return trace;
    }
    inboxes_[entry][msg.msg_id] = msg.payload;
    trace.per_node[entry].first_hop = 0;

    std::vector<std::uint32_t> frontier{entry};
    int hop = 0;
    while (!frontier.empty()) {
        std::vector<std::uint32_t> next_frontier;
        for (std::uint32_t node : frontier) {
            trace.forwards.emplace_back(node, msg.msg_id);
            for (std::uint32_t peer : topology_.neighbors[node]) {
                if (edge_dropped()) {
                    continue;
                }
                if (inboxes_[peer].count(msg.msg_id)) {
                    continue;  // forward new messages only
                }
                if (!verify_message(msg)) {
                    trace.per_node[peer].rejected_count += 1;
                    continue;
                }
                inboxes_[peer][msg.msg_id] = msg.payload;
                trace.per_node[peer].first_hop = hop + 1;
                next_frontier.push_back(peer);
            }
        }
        frontier = std::move(next_frontier);
        ++hop;
    }
    return trace;
}

std::vector<Bytes> GossipNetwork::deliver_inbox(const PublicKey& node) const {
    std::uint32_t index = topology_.index_of(node);
    std::vector<Bytes> out;
    out.reserve(inboxes_[index].size());
    for (const auto& [id, payload] : inboxes_[index]) {
        out.push_back(payload);
    }
    return out;
}

void GossipNetwork::clear_inboxes() {
    for (auto& inbox : inboxes_) {
        inbox.clear();
    }
}

}  // namespace web3db::gossip
