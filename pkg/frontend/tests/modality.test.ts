import { describe, expect, it } from "vitest";

import { modalityOf } from "../src/modality";

describe("modality classification", () => {
  it("matches the server's extension table", () => {
    expect(modalityOf("a.mp4")).toBe("video");
    expect(modalityOf("a.mov")).toBe("video");
    expect(modalityOf("a.nef")).toBe("video");
    expect(modalityOf("a.jpg")).toBe("image");
    expect(modalityOf("a.jpeg")).toBe("image");
    expect(modalityOf("a.png")).toBe("image");
    expect(modalityOf("a.wav")).toBe("audio");
    expect(modalityOf("a.flac")).toBe("audio");
    expect(modalityOf("a.mp3")).toBe("audio");
  });

  it("is case-insensitive and rejects the rest", () => {
    expect(modalityOf("CLIP.MP4")).toBe("video");
    expect(modalityOf("doc.pdf")).toBeNull();
    expect(modalityOf("noext")).toBeNull();
    expect(modalityOf("archive.tar.gz")).toBeNull();
  });
});
