void launch_saxpy(void *dx, void *dy, int n, int grid, int block, void *stream)
{
    saxpy<<<grid, block, 0, stream>>>(dx, dy, n);
    finish();
}
