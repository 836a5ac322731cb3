"""Synthetic document generators shared between test modules."""


def synthesize_tei(rng):
    """Random TEI plus the paragraph texts a correct parser must recover."""
    words = ["neural", "protein", "graph", "sampling", "bounds", "attention",
             "estimator", "genome", "lattice", "policy"]
    sections = []
    expected = []
    n_sections = rng.randint(1, 6)
    for s in range(n_sections):
        heading = f"Section {s}" if rng.random() < 0.8 else ""
        paragraphs = []
        for _ in range(rng.randint(0, 5)):
            if rng.random() < 0.15:
                paragraphs.append("   ")
                continue
            text = " ".join(rng.choice(words) for _ in range(rng.randint(3, 12)))
            paragraphs.append(text)
            expected.append((s, text))
        sections.append((heading, paragraphs))
    chunks = ['<TEI xmlns="http://www.tei-c.org/ns/1.0"><text><body>']
    for heading, paragraphs in sections:
        chunks.append("<div>")
        if heading:
            chunks.append(f"<head>{heading}</head>")
        for text in paragraphs:
            chunks.append(f"<p>{text}</p>")
        chunks.append("</div>")
    chunks.append("</body></text></TEI>")
    return "".join(chunks).encode("utf-8"), expected
