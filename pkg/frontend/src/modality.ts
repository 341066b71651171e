/**
 * Client-side mirror of the server's extension table, used only to pick
 * which detector list to request. The server remains the authority: a file
 * that slips past this check is still rejected at upload time.
 */

export type Modality = "image" | "video" | "audio";

const EXTENSIONS: Record<Modality, readonly string[]> = {
  video: ["mp4", "bmp", "tif", "nef", "raf", "avi", "mov"],
  image: ["jpg", "png", "jpeg"],
  audio: ["flac", "wav", "mp3"],
};

export function modalityOf(filename: string): Modality | null {
  const dot = filename.lastIndexOf(".");
  if (dot < 0) return null;
  const ext = filename.slice(dot + 1).toLowerCase();
  for (const modality of Object.keys(EXTENSIONS) as Modality[]) {
    if (EXTENSIONS[modality].includes(ext)) return modality;
  }
  return null;
}
