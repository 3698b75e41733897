//! Line art: thinning, skeleton graph, spanning tree, longest-path strokes.

use pancake::planner::{build_graph, fixture_corpus, mst_refine, skeletonize, tree_to_strokes};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, smiley) = fixture_corpus()
        .into_iter()
        .find(|(name, _)| *name == "smiley")
        .expect("smiley fixture");
    let skel = skeletonize(&smiley);
    println!("{} px drawing -> {} px skeleton", smiley.count(), skel.count());
    let graph = build_graph(&skel)?;
    let tree = mst_refine(&graph)?;
    println!(
        "graph: {} nodes, {} edges; tree: {} edges, {} components",
        graph.nodes.len(),
        graph.edges.len(),
        tree.edges.len(),
        tree.components().1
    );
    for (i, s) in tree_to_strokes(&tree)?.iter().enumerate() {
        println!("stroke {i}: {} px from {:?} to {:?}", s.len(), s[0], s[s.len() - 1]);
    }
    Ok(())
}
