"""Certify the lower-bound instances: forced edges and doubling witnesses.

Two families of adversarial inputs.  The tree metric forces any navigable
graph to spend an edge per (leaf, level) pair; the block family forces a
quadratic edge count per block.  Both keep small doubling dimension, which
the sampled ball-cover checks certify.

Run: python demos/hard_instances.py
"""

from navgraph import (
    check_block_doubling,
    check_tree_doubling,
    gen_block_instance,
    gen_tree_instance,
    verify_forced_edges_blocks,
    verify_forced_edges_tree,
)


def main():
    print("tree family: n leaves on a depth-h binary tree, distance 2^level")
    for n, delta in ((4, 8), (16, 256), (32, 1024)):
        inst = gen_tree_instance(n, delta)
        rep = verify_forced_edges_tree(inst)
        print(
            f"  n={n:3d} delta={delta:5d} height={inst.height:2d}: "
            f"{rep.certified}/{rep.expected} forced edges certified "
            f"(that is n*floor(h/2))"
        )

    print("\nblock family: t blocks of an s^d grid, one adversary per point")
    for s, t, d in ((2, 1, 1), (4, 3, 2), (3, 2, 3)):
        inst = gen_block_instance(s, t, d)
        rep = verify_forced_edges_blocks(inst)
        print(
            f"  s={s} t={t} d={d} (n={inst.n:3d}): "
            f"{rep.certified}/{rep.expected} forced ordered pairs "
            f"(that is t*s^d*(s^d-1))"
        )

    print("\ndoubling witnesses: sampled balls covered at half radius")
    tree = check_tree_doubling(gen_tree_instance(16, 256), samples=500, seed=3)
    print(
        f"  tree:   {tree.successes}/{tree.trials} balls, "
        f"budget {tree.budget}, max centers used {tree.max_centers}"
    )
    block = check_block_doubling(
        gen_block_instance(4, 3, 2), p_star=0, samples=500, seed=3
    )
    print(
        f"  blocks: {block.successes}/{block.trials} balls, "
        f"budget {block.budget} (1 + 2^d), max centers used {block.max_centers}"
    )


if __name__ == "__main__":
    main()
