double draw_one(void *state)
{
    double r = rocrand_uniform_double(state);
    record(r);
    return r;
}
