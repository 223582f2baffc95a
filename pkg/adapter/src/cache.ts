/** Bounded LRU keyed by image_ref, backing the per-session raster cache. */

export class LruCache<K, V> {
  private map = new Map<K, V>();

  constructor(private capacity: number) {
    if (capacity < 1) throw new Error("cache capacity must be >= 1");
  }

  get(key: K): V | undefined {
    const value = this.map.get(key);
    if (value !== undefined) {
      this.map.delete(key);
      this.map.set(key, value);
    }
    return value;
  }

  set(key: K, value: V): void {
    if (this.map.has(key)) this.map.delete(key);
    this.map.set(key, value);
    if (this.map.size > this.capacity) {
      const oldest = this.map.keys().next().value as K;
      this.map.delete(oldest);
    }
  }

  get size(): number {
    return this.map.size;
  }
}
